"""Paper-style figures regenerated from the experiment harness CSVs.

The plots are pure functions of the input tables: no coupling to the
estimator package, only to its persisted column layout. Every command emits
both a PNG and an SVG next to the requested output path.
"""

from __future__ import annotations

import csv
import os
import warnings
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("error_complexity", "mse_band")


class SchemaError(ValueError):
    """The input CSV lacks columns the requested figure needs."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input table, kind, output path, axis scales."""

    input_csv: str
    kind: str
    output: str
    logx: bool = False
    logy: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def read_table(path, required, optional=()):
    """Load CSV columns as float arrays, insisting on the required names."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        names = reader.fieldnames or []
        missing = [name for name in required if name not in names]
        if missing:
            raise SchemaError(f"{path} is missing columns: {', '.join(missing)}")
        wanted = list(required) + [name for name in optional if name in names]
        rows = {name: [] for name in wanted}
        for line in reader:
            for name in wanted:
                value = line[name]
                rows[name].append(float(value) if value not in ("", None) else np.nan)
    if not rows[required[0]]:
        raise SchemaError(f"{path} has a header but no data rows")
    return {name: np.array(values) for name, values in rows.items()}


def _per_dimension_mean(d, values):
    dims = np.unique(d)
    means = np.array([values[d == dim].mean() for dim in dims])
    return dims, means


def _apply_scales(axes, spec):
    for ax in axes:
        if spec.logx:
            ax.set_xscale("log")
        if spec.logy:
            ax.set_yscale("log")


def _save(fig, output):
    base, ext = os.path.splitext(output)
    ext = ext or ".png"
    targets = {ext.lower()}
    targets.update((".png", ".svg"))
    written = []
    for suffix in sorted(targets):
        target = base + suffix
        fig.savefig(target, bbox_inches="tight")
        written.append(target)
    return written


def plot_error_complexity(records_csv, output, logx=False, logy=False):
    """Two panels per step-size base: absolute error and total seeds against d.

    The error panel carries the target-error guide when the table has an
    epsilon column; the seed panel carries a linear-in-d reference anchored
    at the smallest dimension.
    """
    spec = FigureSpec(input_csv=str(records_csv), kind="error_complexity",
                      output=str(output), logx=logx, logy=logy)
    table = read_table(spec.input_csv, required=("d", "abs_error", "total_seeds", "gamma"),
                       optional=("epsilon",))
    fig, (ax_err, ax_cost) = plt.subplots(1, 2, figsize=(11, 4.2))
    for gamma in np.unique(table["gamma"]):
        mask = table["gamma"] == gamma
        dims, err = _per_dimension_mean(table["d"][mask], table["abs_error"][mask])
        _, seeds = _per_dimension_mean(table["d"][mask], table["total_seeds"][mask])
        label = f"gamma={gamma:g}"
        ax_err.plot(dims, err, marker="o", label=label)
        ax_cost.plot(dims, seeds, marker="o", label=label)
        anchor = seeds[0] / dims[0]
        ax_cost.plot(dims, anchor * dims, linestyle="--", color="gray",
                     label="linear reference" if gamma == np.unique(table["gamma"])[0] else None)
    if "epsilon" in table:
        eps = np.unique(table["epsilon"][~np.isnan(table["epsilon"])])
        if eps.size == 1:
            ax_err.axhline(eps[0], color="black", linewidth=0.8, linestyle=":",
                           label=f"target eps={eps[0]:g}")
    ax_err.set_xlabel("dimension")
    ax_err.set_ylabel("absolute error")
    ax_err.legend()
    ax_cost.set_xlabel("dimension")
    ax_cost.set_ylabel("total Gaussian variates")
    ax_cost.legend()
    _apply_scales((ax_err, ax_cost), spec)
    fig.tight_layout()
    _save(fig, spec.output)
    return fig


def plot_mse_band(summary_csv, output, logx=False, logy=False):
    """Mean square error against dimension with its 95% band and the eps^2 guide."""
    spec = FigureSpec(input_csv=str(summary_csv), kind="mse_band",
                      output=str(output), logx=logx, logy=logy)
    table = read_table(spec.input_csv, required=("d", "mse"),
                       optional=("band_low", "band_high", "epsilon"))
    if "band_low" in table and "band_high" in table:
        has_band = not (np.isnan(table["band_low"]).all()
                        or np.isnan(table["band_high"]).all())
    else:
        warnings.warn("band columns absent; plotting MSE without its 95% band")
        has_band = False

    order = np.argsort(table["d"])
    dims = table["d"][order]
    mse = table["mse"][order]
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    if dims.size == 1:
        ax.plot(dims, mse, marker="o", linestyle="none", label="MSE")
        has_band = False
    else:
        ax.plot(dims, mse, marker="o", label="MSE")
    if has_band:
        low = table["band_low"][order]
        high = table["band_high"][order]
        keep = ~(np.isnan(low) | np.isnan(high))
        ax.fill_between(dims[keep], low[keep], high[keep], alpha=0.3,
                        label="95% band")
    if "epsilon" in table:
        eps = np.unique(table["epsilon"][~np.isnan(table["epsilon"])])
        if eps.size == 1:
            ax.axhline(eps[0] ** 2, color="black", linewidth=0.8, linestyle=":",
                       label=f"eps^2={eps[0] ** 2:g}")
    ax.set_xlabel("dimension")
    ax.set_ylabel("mean square error")
    ax.legend()
    _apply_scales((ax,), spec)
    fig.tight_layout()
    _save(fig, spec.output)
    return fig


def render(spec: FigureSpec):
    """Dispatch a figure request to its renderer."""
    if spec.kind == "error_complexity":
        return plot_error_complexity(spec.input_csv, spec.output, spec.logx, spec.logy)
    return plot_mse_band(spec.input_csv, spec.output, spec.logx, spec.logy)
