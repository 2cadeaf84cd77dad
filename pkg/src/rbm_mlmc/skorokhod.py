"""Discrete reflection map: one static linear complementarity problem per grid step.

The per-step problem finds y >= 0 and push >= 0 with y = x + R @ push and
complementary supports. Solving it at every step of a piecewise-linear input
realizes the reflected path at the grid points, which is all the estimator
ever evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AlignmentError, LcpConvergenceError, LcpSubmatrixError, ParameterError
from .paths import GridPath

LCP_EPS = 1e-8


def _refl_array(refl) -> np.ndarray:
    refl = getattr(refl, "refl", refl)
    return np.ascontiguousarray(np.asarray(refl, dtype=np.float64))


def _y0_array(y0, d) -> np.ndarray:
    if y0 is None:
        return np.zeros(d)
    y0 = np.ascontiguousarray(np.asarray(y0, dtype=np.float64).reshape(-1))
    if y0.shape[0] != d:
        raise ParameterError(f"initial state has dimension {y0.shape[0]}, expected {d}")
    # reflected states themselves satisfy y >= -eps, so restarting from one
    # must tolerate negatives down to the same boundary slack
    if y0.min() < -LCP_EPS:
        raise ParameterError("initial state must be nonnegative")
    return y0


@dataclass(frozen=True)
class LcpSolution:
    """Nonnegative state, push amounts, and active-set sweeps for one static step."""

    y: np.ndarray
    push: np.ndarray
    iterations: int


def solve_lcp(refl, x, eps=LCP_EPS, max_sweeps=None) -> LcpSolution:
    """Solve y = x + refl @ push with y >= 0, push >= 0, complementary supports.

    Active-set sweeps: start from y = x; while some y_i < -eps, push on the
    set {i: y_i < eps} by solving the principal subsystem. Requires an
    M-matrix reflection; the sweep cap (default 10 d) turns non-convergence
    on other inputs into an error rather than a hang.
    """
    refl = _refl_array(refl)
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64).reshape(-1))
    d = x.shape[0]
    if refl.shape != (d, d):
        raise ParameterError(f"reflection matrix {refl.shape} does not match input of length {d}")
    if max_sweeps is None:
        max_sweeps = 10 * d
    y, push, sweeps, status = _kernels.lcp_active_set(refl, x, eps, max_sweeps)
    if status == _kernels.SWEEP_CAP:
        raise LcpConvergenceError(
            f"no convergence in {sweeps} active-set sweeps (residual {float(-y.min()):.3e}); "
            "reflection matrix is likely not an M-matrix",
            residual=float(-y.min()),
        )
    if status == _kernels.SINGULAR:
        raise LcpSubmatrixError("singular principal submatrix of the reflection matrix")
    if status == _kernels.NEG_PUSH:
        raise LcpConvergenceError(
            f"terminated with negative push amounts (min {float(push.min()):.3e}); "
            "reflection matrix is not an M-matrix",
            residual=float(-push.min()),
        )
    return LcpSolution(y=y, push=push, iterations=sweeps)


@dataclass(frozen=True)
class ReflectedPath:
    """Reflected states and cumulative push amounts on the same grid as the input."""

    level: int
    step: float
    horizon: float
    y_values: np.ndarray
    cumulative_push: np.ndarray
    origin_time: float = 0.0

    def __post_init__(self):
        self.y_values.setflags(write=False)
        self.cumulative_push.setflags(write=False)

    @property
    def terminal(self) -> np.ndarray:
        return self.y_values[-1]

    @property
    def num_steps(self) -> int:
        return self.y_values.shape[0] - 1


def _raise_step_error(status, step):
    if status == _kernels.SWEEP_CAP:
        raise LcpConvergenceError(
            f"reflection stalled at step {step}: active-set sweep cap exceeded", step=step
        )
    if status == _kernels.SINGULAR:
        raise LcpSubmatrixError(
            f"singular principal submatrix while reflecting step {step}", step=step
        )
    if status == _kernels.NEG_PUSH:
        raise LcpConvergenceError(
            f"negative push amounts at step {step}; reflection matrix is not an M-matrix",
            step=step,
        )


def reflect_path(x_path: GridPath, refl, y0=None, eps=LCP_EPS, max_sweeps=None) -> ReflectedPath:
    """Reflect a driving input path step by step from the state ``y0``.

    Each grid step feeds the previous state plus the input increment into the
    static complementarity solve; pushes accumulate into non-decreasing
    per-coordinate totals.
    """
    refl = _refl_array(refl)
    y0 = _y0_array(y0, x_path.d)
    if refl.shape[0] != x_path.d:
        raise ParameterError(f"reflection matrix {refl.shape} does not match path dimension {x_path.d}")
    if max_sweeps is None:
        max_sweeps = 10 * x_path.d
    y_values, cum_push, status, step = _kernels.reflect_full(
        np.ascontiguousarray(x_path.values), refl, y0, eps, max_sweeps
    )
    _raise_step_error(status, step)
    return ReflectedPath(level=x_path.level, step=x_path.step, horizon=x_path.horizon,
                         y_values=y_values, cumulative_push=cum_push,
                         origin_time=x_path.origin_time)


def reflect_terminal(x_values: np.ndarray, refl, y0=None, eps=LCP_EPS, max_sweeps=None) -> np.ndarray:
    """Terminal reflected state only; avoids storing the whole state history."""
    x_values = np.ascontiguousarray(x_values)
    refl = _refl_array(refl)
    d = x_values.shape[1]
    y0 = _y0_array(y0, d)
    if max_sweeps is None:
        max_sweeps = 10 * d
    y, _, status, step = _kernels.reflect_terminal(x_values, refl, y0, eps, max_sweeps)
    _raise_step_error(status, step)
    return y


def lipschitz_gap(x_path: GridPath, x_path_alt: GridPath, refl, y0=None):
    """Sup-norm gaps (output, input) between the reflections of two inputs.

    Both paths must share the grid and the starting state. Used to exercise
    the contraction property: the output gap is bounded by
    2 * ||refl^-1||_inf times the input gap.
    """
    if (x_path.num_steps != x_path_alt.num_steps or x_path.d != x_path_alt.d
            or abs(x_path.step - x_path_alt.step) > 1e-15):
        raise AlignmentError("input paths do not share a grid")
    first = reflect_path(x_path, refl, y0)
    second = reflect_path(x_path_alt, refl, y0)
    out_gap = float(np.abs(first.y_values - second.y_values).max())
    in_gap = float(np.abs(x_path.values - x_path_alt.values).max())
    return out_gap, in_gap
