"""Experiment harness: plans, replication sweeps, persistence, and summaries.

A plan names a model family, the dimensions and step-size bases to sweep,
the target error, and the replication count. Running it produces one record
per (dimension, gamma, replication) in a fixed-column CSV, resumable by key,
with a JSON sidecar of the fully resolved plan for provenance.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import mlmc
from .errors import InsufficientDataError, ParameterError
from .params import (NetworkParams, UniformityConstants, build_symmetric, load_network,
                     require_assumptions, steady_state_truth, symmetric_constants)
from .paths import inverse_gamma

RECORD_COLUMNS = ("d", "gamma", "epsilon", "replication", "estimate", "truth",
                  "abs_error", "total_seeds", "wall_time_s", "L", "T", "N")
SUMMARY_COLUMNS = ("d", "gamma", "epsilon", "replications", "mse", "band_low",
                   "band_high", "est_variance")
MIN_BAND_REPS = 30


@dataclass(frozen=True)
class ExperimentPlan:
    """Declarative description of a sweep; see README for the JSON schema."""

    model: str = "symmetric"
    beta: float = 0.8
    network: str | dict | None = None
    dims: tuple[int, ...] = (5, 10, 20, 30, 40, 50)
    gammas: tuple[float, ...] = (0.05,)
    epsilon: float = 0.05
    replications: int = 1
    convention: str = "experiment"
    k1: float = mlmc.DEFAULT_LEVEL_OFFSET
    xi1: float | None = None
    window_override: float | None = None
    levels_override: int | None = None
    rounds_override: int | None = None
    payoff: str = "coord:0"
    master_seed: int = 0
    output: str = "records.csv"
    threads: int | None = None

    def __post_init__(self):
        if self.model not in ("symmetric", "explicit"):
            raise ParameterError(f"unknown model {self.model!r}")
        if self.model == "symmetric":
            if not self.dims:
                raise ParameterError("plan needs at least one dimension")
            if any(d < 2 for d in self.dims):
                raise ParameterError("symmetric model needs every dimension >= 2")
            if not 0.0 < self.beta < 1.0:
                raise ParameterError(f"beta must lie in (0, 1), got {self.beta}")
        elif self.network is None:
            raise ParameterError("explicit model needs a 'network' file or matrices")
        if self.replications < 1:
            raise ParameterError(f"replications must be >= 1, got {self.replications}")
        for gamma in self.gammas:
            inverse_gamma(gamma)
        if not 0.0 < self.epsilon < 1.0:
            raise ParameterError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.master_seed < 0:
            raise ParameterError("master seed must be nonnegative")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))


def plan_from_file(path) -> ExperimentPlan:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed plan file {path}: {exc}") from exc
    known = set(ExperimentPlan.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ParameterError(f"unknown plan keys: {', '.join(sorted(unknown))}")
    if "dims" in raw:
        raw["dims"] = tuple(raw["dims"])
    if "gammas" in raw:
        raw["gammas"] = tuple(raw["gammas"])
    return ExperimentPlan(**raw)


def write_plan_sidecar(plan: ExperimentPlan, path) -> None:
    resolved = asdict(plan)
    resolved["dims"] = list(plan.dims)
    resolved["gammas"] = list(plan.gammas)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(resolved, handle, indent=2, sort_keys=True)
        handle.write("\n")


@dataclass(frozen=True)
class ExperimentRecord:
    """One estimator run within a plan."""

    d: int
    gamma: float
    epsilon: float
    replication: int
    estimate: float
    truth: float | None
    abs_error: float | None
    total_seeds: int
    wall_time_s: float
    num_levels: int
    window_length: float
    num_rounds: int
    per_level: tuple | None = None

    def csv_row(self):
        return [self.d, repr(self.gamma), repr(self.epsilon), self.replication,
                repr(self.estimate),
                "" if self.truth is None else repr(self.truth),
                "" if self.abs_error is None else repr(self.abs_error),
                self.total_seeds, repr(self.wall_time_s),
                self.num_levels, repr(self.window_length), self.num_rounds]


def _default_constants(params: NetworkParams, beta=None) -> UniformityConstants:
    """Certifiable constants: exact for the symmetric family, heuristic otherwise."""
    if beta is not None:
        return symmetric_constants(beta)
    routing_norm = float(np.abs(params.q).sum(axis=0).max())
    if routing_norm >= 1.0:
        raise ParameterError(
            "cannot certify uniform contraction: routing matrix 1-norm "
            f"{routing_norm:.6g} >= 1; supply constants explicitly"
        )
    margin = float((params.refl_inverse() @ params.mu).max())
    variances = np.diag(params.sigma)
    b0 = max(1.0, float(variances.max()), float(1.0 / variances.min()))
    return UniformityConstants(beta0=1.0 - routing_norm, kappa0=1.0,
                               delta0=0.5 * -margin, b0=b0)


def _build_model(plan: ExperimentPlan, d) -> tuple[NetworkParams, float | None]:
    if plan.model == "symmetric":
        params = build_symmetric(d, plan.beta)
        return params, steady_state_truth(params, plan.beta)
    if isinstance(plan.network, dict):
        params = NetworkParams.from_matrices(plan.network["mu"], plan.network["sigma"],
                                             plan.network["refl"])
    else:
        params = load_network(plan.network)
    return params, None


def resolve_config(plan: ExperimentPlan, d, gamma, master_seed) -> mlmc.MLMCConfig:
    """Hyperparameters for one (dimension, gamma) cell, with plan overrides applied."""
    hp = mlmc.hyperparams(d, plan.epsilon, gamma, convention=plan.convention,
                          k1=plan.k1, xi1=plan.xi1)
    window = plan.window_override if plan.window_override is not None else hp.window_length
    levels = plan.levels_override if plan.levels_override is not None else hp.num_levels
    rounds = plan.rounds_override if plan.rounds_override is not None else hp.num_rounds
    return mlmc.MLMCConfig(gamma=gamma, window_length=window, num_levels=levels,
                           num_rounds=rounds, target_rmse=plan.epsilon,
                           master_seed=master_seed, payoff=plan.payoff)


def derive_seed(master_seed, d, gamma, replication) -> int:
    """Stable per-record seed, independent of execution order."""
    seq = np.random.SeedSequence((int(master_seed), int(d), inverse_gamma(gamma),
                                  int(replication)))
    return int(seq.generate_state(1, np.uint64)[0])


def _run_cell(params, config, d, gamma, epsilon, replication, truth) -> ExperimentRecord:
    out = mlmc.estimate(params, config, workers=1)
    abs_error = None if truth is None else abs(out.estimate - truth)
    return ExperimentRecord(
        d=d, gamma=gamma, epsilon=epsilon, replication=replication,
        estimate=out.estimate, truth=truth, abs_error=abs_error,
        total_seeds=out.total_seeds, wall_time_s=out.wall_time_s,
        num_levels=config.num_levels, window_length=config.window_length,
        num_rounds=config.num_rounds,
        per_level=tuple((s.level, s.count, s.mean_z, s.var_z) for s in out.per_level),
    )


def _existing_keys(path):
    keys = {}
    if not os.path.exists(path):
        return keys
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return keys
        for row in reader:
            key = (int(row["d"]), float(row["gamma"]), int(row["replication"]))
            keys[key] = _record_from_row(row)
    return keys


def _record_from_row(row) -> ExperimentRecord:
    truth = float(row["truth"]) if row["truth"] else None
    abs_error = float(row["abs_error"]) if row["abs_error"] else None
    return ExperimentRecord(
        d=int(row["d"]), gamma=float(row["gamma"]), epsilon=float(row["epsilon"]),
        replication=int(row["replication"]), estimate=float(row["estimate"]),
        truth=truth, abs_error=abs_error, total_seeds=int(row["total_seeds"]),
        wall_time_s=float(row["wall_time_s"]), num_levels=int(row["L"]),
        window_length=float(row["T"]), num_rounds=int(row["N"]),
    )


def load_records(path) -> list[ExperimentRecord]:
    """Read a records CSV back into record objects."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(RECORD_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ParameterError(f"records file {path} lacks columns: {', '.join(sorted(missing))}")
        return [_record_from_row(row) for row in reader]


def run_plan(plan: ExperimentPlan, workers=None) -> list[ExperimentRecord]:
    """Execute every (dimension, gamma, replication) cell of a plan.

    Results append to the plan output CSV as they complete; cells already
    present in the file are skipped, so an interrupted sweep resumes from
    where it stopped. The returned list always covers the full plan in
    deterministic key order.
    """
    models = {}
    for d in plan.dims:
        params, truth = _build_model(plan, d)
        constants = _default_constants(params, plan.beta if plan.model == "symmetric" else None)
        require_assumptions(params, constants)
        models[d] = (params, truth)

    if workers is None:
        workers = plan.threads if plan.threads is not None else (os.cpu_count() or 1)

    tasks = [(d, gamma, rep)
             for d in sorted(plan.dims)
             for gamma in plan.gammas
             for rep in range(plan.replications)]
    done = _existing_keys(plan.output)
    pending = [t for t in tasks if t not in done]

    out_dir = os.path.dirname(os.path.abspath(plan.output))
    os.makedirs(out_dir, exist_ok=True)
    write_plan_sidecar(plan, plan.output + ".plan.json")
    new_file = not os.path.exists(plan.output)

    def job_args(task):
        d, gamma, rep = task
        params, truth = models[d]
        config = resolve_config(plan, d, gamma, derive_seed(plan.master_seed, d, gamma, rep))
        return params, config, d, gamma, plan.epsilon, rep, truth

    records = dict(done)
    try:
        with open(plan.output, "a", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            if new_file:
                writer.writerow(RECORD_COLUMNS)
                handle.flush()

            def persist(task, record):
                records[task] = record
                writer.writerow(record.csv_row())
                handle.flush()

            if workers <= 1 or len(pending) <= 1:
                for task in pending:
                    persist(task, _run_cell(*job_args(task)))
            else:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    futures = [(task, pool.submit(_run_cell, *job_args(task)))
                               for task in pending]
                    for task, fut in futures:
                        persist(task, fut.result())
    except OSError as exc:
        completed = len(records)
        warnings.warn(
            f"plan output interrupted after {completed}/{len(tasks)} records: {exc}; "
            f"rerun the same command to resume (completed cells are skipped)",
            RuntimeWarning,
        )
        raise
    return [records[t] for t in tasks]


@dataclass(frozen=True)
class MseSummary:
    d: int
    gamma: float
    epsilon: float
    replications: int
    mse: float | None
    band_low: float | None
    band_high: float | None
    est_variance: float

    def csv_row(self):
        def fmt(v):
            return "" if v is None else repr(v)

        return [self.d, repr(self.gamma), repr(self.epsilon), self.replications,
                fmt(self.mse), fmt(self.band_low), fmt(self.band_high),
                repr(self.est_variance)]


def mse_study(plan: ExperimentPlan, summary_path=None, workers=None) -> list[MseSummary]:
    """Replicate the plan and summarize per-cell mean square error.

    The records land in the plan output; the summary (MSE against the
    closed-form truth with a normal-approximation 95% band when the
    replication count supports one) is written to ``summary_path``. Models
    with no closed-form truth get a variance-only summary.
    """
    records = run_plan(plan, workers=workers)
    by_cell = {}
    for rec in records:
        by_cell.setdefault((rec.d, rec.gamma), []).append(rec)

    summaries = []
    for (d, gamma) in sorted(by_cell):
        cell = by_cell[(d, gamma)]
        estimates = np.array([rec.estimate for rec in cell])
        reps = len(cell)
        est_variance = float(estimates.var(ddof=1)) if reps > 1 else 0.0
        truths = [rec.truth for rec in cell]
        if any(t is None for t in truths):
            print(f"note: no closed-form truth at d={d}; reporting estimator variance only")
            summaries.append(MseSummary(d, gamma, plan.epsilon, reps, None, None, None,
                                        est_variance))
            continue
        sq_errors = np.array([(rec.estimate - rec.truth) ** 2 for rec in cell])
        mse = float(sq_errors.mean())
        if reps >= MIN_BAND_REPS:
            half = 1.96 * float(sq_errors.std(ddof=1)) / math.sqrt(reps)
            band = (mse - half, mse + half)
        else:
            band = (None, None)
        summaries.append(MseSummary(d, gamma, plan.epsilon, reps, mse, band[0], band[1],
                                    est_variance))

    if summary_path is not None:
        with open(summary_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(SUMMARY_COLUMNS)
            for summary in summaries:
                writer.writerow(summary.csv_row())
    return summaries


@dataclass(frozen=True)
class ComplexityFit:
    slope: float
    intercept: float
    r_squared: float
    dims: tuple[int, ...]
    mean_seeds: tuple[float, ...]


def complexity_fit(records) -> ComplexityFit:
    """Least-squares slope of log total seeds against log dimension.

    Records must share one (gamma, epsilon) cell and cover at least four
    distinct dimensions; seed counts are averaged per dimension first.
    """
    rows = [(rec.d, rec.gamma, rec.epsilon, rec.total_seeds) for rec in records]
    if not rows:
        raise InsufficientDataError("no records to fit")
    cells = {(gamma, epsilon) for _, gamma, epsilon, _ in rows}
    if len(cells) > 1:
        raise ParameterError(
            f"records mix {len(cells)} (gamma, epsilon) cells; fit them separately"
        )
    by_d = {}
    for d, _, _, seeds in rows:
        by_d.setdefault(d, []).append(seeds)
    if len(by_d) < 4:
        raise InsufficientDataError(
            f"complexity fit needs >= 4 distinct dimensions, got {len(by_d)}"
        )
    dims = tuple(sorted(by_d))
    means = tuple(float(np.mean(by_d[d])) for d in dims)
    x = np.log(np.array(dims, dtype=float))
    y = np.log(np.array(means))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ComplexityFit(slope=float(slope), intercept=float(intercept),
                         r_squared=r_squared, dims=dims, mean_seeds=means)
