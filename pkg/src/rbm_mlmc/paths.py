"""Discretized Brownian paths on nested grids, with exact variate accounting.

Level-m paths live on the grid {0, step, 2*step, ...} with step gamma**m.
Restricting 1/gamma to integers makes consecutive grids nested, so a coarse
path is a subsampling of the fine one rather than an interpolation, and the
two discretizations agree exactly at shared points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, ParameterError

MAX_GRID_STEPS = 200_000_000
_SNAP = 1e-9


def inverse_gamma(gamma) -> int:
    """The integer 1/gamma; raises if gamma is not the reciprocal of an integer >= 2."""
    if not 0.0 < gamma < 1.0:
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
    inv = round(1.0 / gamma)
    if inv < 2 or abs(1.0 / gamma - inv) > _SNAP:
        raise ParameterError(
            f"1/gamma must be a positive integer for nested grids, got 1/{gamma} = {1.0 / gamma}"
        )
    return inv


def steps_for(horizon, step) -> int:
    """Number of grid steps covering ``horizon``, snapping up to the next grid point."""
    if horizon <= 0.0:
        raise ParameterError(f"horizon must be positive, got {horizon}")
    n = math.ceil(horizon / step - _SNAP)
    if n > MAX_GRID_STEPS:
        raise ParameterError(f"grid of {n} steps exceeds the supported size")
    return max(n, 1)


def _time_index(t, step, what) -> int:
    idx = t / step
    nearest = round(idx)
    if abs(idx - nearest) > _SNAP * max(1.0, abs(idx)):
        raise AlignmentError(f"{what}={t} is not on the grid with step {step}")
    return int(nearest)


class SeedCounter:
    """Running count of standard-normal variates drawn; the cost unit of the method."""

    __slots__ = ("count",)

    def __init__(self, count: int = 0):
        self.count = int(count)

    def add(self, n: int):
        if n < 0:
            raise ParameterError("seed counter cannot decrease")
        self.count += int(n)

    def __repr__(self):
        return f"SeedCounter(count={self.count})"


@dataclass(frozen=True)
class GridPath:
    """Values of a d-dimensional path at the level grid points, row 0 at zero.

    ``values`` has shape (num_steps + 1, d) and is read-only after
    construction. ``origin_time`` records where a window was cut from its
    parent path; it never enters the arithmetic.
    """

    level: int
    step: float
    horizon: float
    values: np.ndarray
    origin_time: float = 0.0

    def __post_init__(self):
        self.values.setflags(write=False)
        if self.values.ndim != 2:
            raise ParameterError(f"path values must be 2-d, got shape {self.values.shape}")
        if np.any(self.values[0] != 0.0):
            raise ParameterError("path values must start at the zero vector")
        n = self.num_steps
        if not (n * self.step + _SNAP >= self.horizon > (n - 1) * self.step - _SNAP):
            raise ParameterError(
                f"horizon {self.horizon} inconsistent with {n} steps of size {self.step}"
            )

    @property
    def num_steps(self) -> int:
        return self.values.shape[0] - 1

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def grid_end(self) -> float:
        return self.num_steps * self.step


def sample_fine_path(params, gamma, level, horizon, rng, counter: SeedCounter) -> GridPath:
    """Simulate a standard Brownian path at the level grid over [0, horizon].

    Each increment row is Normal(0, step * I); the counter grows by d per
    grid step, which is the exact number of Gaussians consumed. The horizon
    snaps up to the next grid point.
    """
    inverse_gamma(gamma)
    if level < 0:
        raise ParameterError(f"level must be >= 0, got {level}")
    step = gamma**level
    n = steps_for(horizon, step)
    increments = rng.standard_normal((n, params.d)) * math.sqrt(step)
    values = np.empty((n + 1, params.d))
    values[0] = 0.0
    np.cumsum(increments, axis=0, out=values[1:])
    counter.add(n * params.d)
    return GridPath(level=level, step=step, horizon=horizon, values=values)


def restrict_to_coarse(fine: GridPath, gamma) -> GridPath:
    """Subsample a level-(m+1) path onto the level-m grid.

    The coarse values are the fine values at every (1/gamma)-th index,
    bit-identically; no randomness is consumed.
    """
    inv = inverse_gamma(gamma)
    if fine.level < 1:
        raise ParameterError(f"cannot coarsen below level 0 (path level {fine.level})")
    if fine.num_steps % inv != 0:
        raise AlignmentError(
            f"fine path with {fine.num_steps} steps does not cover whole coarse steps "
            f"(stride {inv})"
        )
    values = fine.values[::inv].copy()
    return GridPath(level=fine.level - 1, step=gamma ** (fine.level - 1),
                    horizon=fine.horizon, values=values, origin_time=fine.origin_time)


def apply_drift_diffusion(bm: GridPath, params) -> GridPath:
    """Turn a standard Brownian path into the driving input: drift * t plus C times the path."""
    if bm.d != params.d:
        raise ParameterError(f"path has dimension {bm.d}, model has {params.d}")
    t = np.arange(bm.num_steps + 1) * bm.step
    values = t[:, None] * params.mu[None, :] + bm.values @ params.chol.T
    return GridPath(level=bm.level, step=bm.step, horizon=bm.horizon,
                    values=values, origin_time=bm.origin_time)


def window(path: GridPath, from_time, to_time) -> GridPath:
    """Increments of the path over [from_time, to_time], re-based to start at zero.

    Both endpoints must lie on the path grid.
    """
    i0 = _time_index(from_time, path.step, "from_time")
    i1 = _time_index(to_time, path.step, "to_time")
    if not 0 <= i0 < i1 <= path.num_steps:
        raise AlignmentError(
            f"window [{from_time}, {to_time}] outside path range [0, {path.grid_end}]"
        )
    values = path.values[i0:i1 + 1] - path.values[i0]
    return GridPath(level=path.level, step=path.step,
                    horizon=(i1 - i0) * path.step, values=values,
                    origin_time=path.origin_time + from_time)


def dump_path(path: GridPath, file) -> None:
    """Write a path as text: a header with (d, level, step, rows), then row-major values."""
    header = f"d={path.d} level={path.level} step={path.step!r} rows={path.num_steps + 1}"
    np.savetxt(file, path.values, header=header)


def load_path(file) -> GridPath:
    """Read back a path written by ``dump_path``."""
    if hasattr(file, "read"):
        lines = file.read().splitlines()
    else:
        with open(file, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParameterError("path dump is missing its header line")
    fields = dict(part.split("=") for part in lines[0][1:].split())
    values = np.loadtxt(lines[1:], ndmin=2)
    level = int(fields["level"])
    step = float(fields["step"])
    if values.shape != (int(fields["rows"]), int(fields["d"])):
        raise ParameterError(
            f"path dump shape {values.shape} disagrees with header {fields}"
        )
    return GridPath(level=level, step=step, horizon=(values.shape[0] - 1) * step,
                    values=values)
