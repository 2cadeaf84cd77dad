"""Two-parameter multilevel estimator for steady-state expectations.

One sample draws a random level M, simulates a single fine Brownian path on
[0, (M+1)T], and couples the level-(M+1) reflection over the full window
with the level-M reflection over the shifted window [T, (M+1)T] driven by
the same realization. Averaging the weighted differences over N rounds and
adding the payoff at the initial state telescopes into the finest-level,
longest-horizon expectation.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError
from .params import NetworkParams
from .paths import SeedCounter, apply_drift_diffusion, inverse_gamma, sample_fine_path, steps_for
from .skorokhod import reflect_terminal

XI1_PREFACTOR = 1.0 / 557065.0
DEFAULT_LEVEL_OFFSET = -2.0  # additive constant in the level-count formula


def _ceil_snap(value, slack=1e-9) -> int:
    """Ceiling that forgives float fuzz just above an integer."""
    return math.ceil(value - slack)


def level_prefactor(gamma, num_levels) -> float:
    """Normalizing constant of the geometric level distribution."""
    return (1.0 - gamma) / (1.0 - gamma**num_levels)


def level_distribution(gamma, num_levels) -> np.ndarray:
    """Probabilities (prefactor * gamma**m) of drawing each level 0..num_levels-1."""
    if not 0.0 < gamma < 1.0:
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
    if num_levels < 1:
        raise ParameterError(f"need at least one level, got {num_levels}")
    probs = level_prefactor(gamma, num_levels) * gamma ** np.arange(num_levels)
    total = probs.sum()
    if abs(total - 1.0) > 1e-12:
        raise ParameterError(f"level probabilities sum to {total!r}, expected 1")
    return probs


@dataclass(frozen=True)
class Hyperparams:
    """Window length, level count, and round count resolved for one run."""

    window_length: float
    num_levels: int
    num_rounds: int


def hyperparams(d, epsilon, gamma, convention="experiment", k1=DEFAULT_LEVEL_OFFSET,
                xi1=None) -> Hyperparams:
    """Derive (window length, levels, rounds) from dimension and target error.

    The ``experiment`` convention uses window length log(d)^2 / 2 and the
    additive constant -2 in the level count. The ``theory`` convention
    instead sets the window from the contraction-rate bound and needs a
    positive ``xi1``; it is far more conservative, so ``experiment`` is the
    default. Levels clamp to at least one; rounds follow from equalizing
    variance and squared bias.
    """
    if d < 2:
        raise ParameterError(f"dimension must be >= 2 for the level formula, got {d}")
    if not 0.0 < epsilon < 1.0:
        raise ParameterError(f"target error must lie in (0, 1), got {epsilon}")
    inverse_gamma(gamma)
    log_d = math.log(d)
    if convention == "experiment":
        window_length = 0.5 * log_d**2
    elif convention == "theory":
        if xi1 is None or xi1 <= 0.0:
            raise ParameterError("theory convention needs a positive xi1 (see xi1_lower_bound)")
        window_length = float(math.ceil((3.0 * log_d**2 + math.log(1.0 / gamma) * log_d) / xi1))
    else:
        raise ParameterError(f"unknown convention {convention!r}")
    raw = (math.log(log_d) + 2.0 * math.log(1.0 / epsilon) + k1) / math.log(1.0 / gamma)
    num_levels = max(1, _ceil_snap(raw))
    num_rounds = _ceil_snap(
        num_levels * gamma ** (-num_levels) / level_prefactor(gamma, num_levels)
    )
    return Hyperparams(window_length=window_length, num_levels=num_levels,
                       num_rounds=num_rounds)


def xi1_lower_bound(beta0, kappa0, b0, delta0) -> float:
    """Worst-case lower bound on the contraction-rate constant.

    Plugs the uniformity constants into the explicit bound with prefactor
    1/557065; loose in practice but sufficient for the theory convention.
    """
    if not 0.0 < beta0 < 1.0:
        raise ParameterError(f"beta0 must lie in (0, 1), got {beta0}")
    for name, value in (("kappa0", kappa0), ("b0", b0), ("delta0", delta0)):
        if value <= 0.0:
            raise ParameterError(f"{name} must be positive, got {value}")
    crossing = math.log(2.0) / math.log(1.0 / (1.0 - beta0)) + 1.0
    balance = 2.0 + kappa0**2 * b0 / (beta0**2 * delta0**2)
    return XI1_PREFACTOR / (crossing * balance)


def make_payoff(selector, d):
    """Resolve a payoff selector string into a function of the terminal state.

    ``coord:<i>`` evaluates one coordinate (Lipschitz-1 in sup norm);
    ``mean`` evaluates the average over coordinates.
    """
    if selector == "mean":
        return lambda y: float(y.mean())
    if selector.startswith("coord:"):
        try:
            i = int(selector.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"bad payoff selector {selector!r}") from None
        if not 0 <= i < d:
            raise ParameterError(f"payoff coordinate {i} outside dimension {d}")
        return lambda y: float(y[i])
    raise ParameterError(f"unknown payoff selector {selector!r} (use 'coord:<i>' or 'mean')")


@dataclass(frozen=True)
class MLMCConfig:
    """All knobs of one estimator run."""

    gamma: float
    window_length: float
    num_levels: int
    num_rounds: int
    y_init: np.ndarray | None = None
    target_rmse: float | None = None
    master_seed: int = 0
    payoff: str = "coord:0"

    def __post_init__(self):
        inverse_gamma(self.gamma)
        if self.window_length <= 0.0:
            raise ParameterError(f"window length must be positive, got {self.window_length}")
        if self.num_levels < 1:
            raise ParameterError(f"need at least one level, got {self.num_levels}")
        if self.num_rounds < 1:
            raise ParameterError(f"need at least one round, got {self.num_rounds}")
        if self.y_init is not None:
            y0 = np.asarray(self.y_init, dtype=np.float64).reshape(-1)
            if y0.min() < 0.0:
                raise ParameterError("initial state must be nonnegative")
            object.__setattr__(self, "y_init", y0)
        if self.master_seed < 0:
            raise ParameterError("master seed must be nonnegative")

    def with_seed(self, master_seed) -> "MLMCConfig":
        return replace(self, master_seed=master_seed)


def from_hyperparams(hp: Hyperparams, gamma, **kwargs) -> MLMCConfig:
    return MLMCConfig(gamma=gamma, window_length=hp.window_length,
                      num_levels=hp.num_levels, num_rounds=hp.num_rounds, **kwargs)


@dataclass(frozen=True)
class LevelSample:
    """One coupled fine/coarse draw: level, both terminals, weighted difference, cost."""

    level: int
    fine_terminal: np.ndarray
    coarse_terminal: np.ndarray
    z: float
    seeds_used: int


@dataclass(frozen=True)
class LevelStats:
    level: int
    count: int
    mean_z: float
    var_z: float


@dataclass(frozen=True)
class EstimatorOutput:
    """Averaged estimate with per-level diagnostics and the total Gaussian budget."""

    estimate: float
    per_level: list[LevelStats]
    total_seeds: int
    wall_time_s: float


def _sample_rng(master_seed, sample_index):
    return np.random.default_rng(np.random.SeedSequence((int(master_seed), int(sample_index))))


def _draw_level(rng, probs) -> int:
    u = rng.random()
    acc = 0.0
    for m, p in enumerate(probs):
        acc += p
        if u < acc:
            return m
    return len(probs) - 1


def _grid_units(config) -> int:
    """Window length in level-1 grid steps, snapped up.

    Snapping once, to the coarsest grid in play, keeps every shifted window
    of every level draw aligned on its grid (multiples of gamma lie on all
    finer grids), which the telescoping argument needs.
    """
    return steps_for(config.window_length, config.gamma)


def sample_once(params: NetworkParams, config: MLMCConfig, sample_index) -> LevelSample:
    """Draw one coupled estimator sample, deterministic in (master seed, index)."""
    probs = level_distribution(config.gamma, config.num_levels)
    payoff = make_payoff(config.payoff, params.d)
    return _sample(params, config, probs, payoff, sample_index)


def _coupled_terminals(params, config, level, rng, counter):
    """Fine and coarse reflected terminals for one draw at the given level.

    The fine path runs at discretization level + 1 over the whole horizon;
    the coarse terminal reuses the same realization restricted to the
    coarser grid over the window shifted by one snapped window length.
    """
    inv = inverse_gamma(config.gamma)
    units = _grid_units(config)
    horizon = (level + 1) * units * config.gamma
    brownian = sample_fine_path(params, config.gamma, level + 1, horizon, rng, counter)
    expected_steps = (level + 1) * units * inv**level
    if brownian.num_steps != expected_steps:
        raise ParameterError(
            f"grid snap drift: {brownian.num_steps} steps, expected {expected_steps}"
        )
    driving = apply_drift_diffusion(brownian, params)

    y0 = config.y_init if config.y_init is not None else np.zeros(params.d)
    fine_terminal = reflect_terminal(driving.values, params.refl, y0)
    if level == 0:
        # Zero-length coarse window: the level-0 term is the initial state.
        coarse_terminal = y0.copy()
    else:
        start = units * inv**level  # index of the window shift on the fine grid
        coarse_terminal = reflect_terminal(driving.values[start::inv], params.refl, y0)
    return fine_terminal, coarse_terminal


def _sample(params, config, probs, payoff, sample_index) -> LevelSample:
    rng = _sample_rng(config.master_seed, sample_index)
    m = _draw_level(rng, probs)
    counter = SeedCounter()
    fine_terminal, coarse_terminal = _coupled_terminals(params, config, m, rng, counter)
    z = (payoff(fine_terminal) - payoff(coarse_terminal)) / probs[m]
    return LevelSample(level=m, fine_terminal=fine_terminal,
                       coarse_terminal=coarse_terminal, z=float(z),
                       seeds_used=counter.count)


def _sample_chunk(params, config, start, stop):
    probs = level_distribution(config.gamma, config.num_levels)
    payoff = make_payoff(config.payoff, params.d)
    out = []
    for i in range(start, stop):
        s = _sample(params, config, probs, payoff, i)
        out.append((s.level, s.z, s.seeds_used))
    return start, out


def estimate(params: NetworkParams, config: MLMCConfig, workers=None) -> EstimatorOutput:
    """Average ``num_rounds`` independent samples into the steady-state estimate.

    Samples are indexed deterministically, so the result is independent of
    the worker count and schedule; the reduction always runs in index order.
    """
    t0 = time.perf_counter()
    n = config.num_rounds
    payoff = make_payoff(config.payoff, params.d)
    levels = np.empty(n, dtype=np.int64)
    zs = np.empty(n, dtype=np.float64)
    seeds = np.empty(n, dtype=np.int64)

    if workers is None or workers <= 1 or n < 4:
        probs = level_distribution(config.gamma, config.num_levels)
        for i in range(n):
            s = _sample(params, config, probs, payoff, i)
            levels[i], zs[i], seeds[i] = s.level, s.z, s.seeds_used
    else:
        bounds = np.linspace(0, n, min(workers * 4, n) + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sample_chunk, params, config, int(a), int(b))
                       for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            for fut in futures:
                start, rows = fut.result()
                for offset, (lvl, z, sd) in enumerate(rows):
                    levels[start + offset] = lvl
                    zs[start + offset] = z
                    seeds[start + offset] = sd

    y0 = config.y_init if config.y_init is not None else np.zeros(params.d)
    value = payoff(y0) + float(zs.mean())

    per_level = []
    for m in range(config.num_levels):
        mask = levels == m
        count = int(mask.sum())
        mean_z = float(zs[mask].mean()) if count else math.nan
        var_z = float(zs[mask].var(ddof=1)) if count > 1 else math.nan
        per_level.append(LevelStats(level=m, count=count, mean_z=mean_z, var_z=var_z))

    return EstimatorOutput(estimate=value, per_level=per_level,
                           total_seeds=int(seeds.sum()),
                           wall_time_s=time.perf_counter() - t0)


def expected_seeds_per_sample(params_d, config: MLMCConfig) -> float:
    """Closed-form expected Gaussian count of one sample under the level distribution."""
    probs = level_distribution(config.gamma, config.num_levels)
    inv = inverse_gamma(config.gamma)
    units = _grid_units(config)
    return float(sum(p * (m + 1) * units * inv**m * params_d
                     for m, p in enumerate(probs)))
