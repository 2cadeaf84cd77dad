"""Network parameterizations for reflected Brownian motion in the orthant.

A model is a drift vector, a covariance matrix with its lower-triangular
factor, and a reflection matrix of the form R = I - Q^T with Q substochastic.
Validation enforces the M-matrix and stability conditions at construction,
so every ``NetworkParams`` instance in circulation is simulatable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AssumptionError, FactorizationError, ParameterError

PSD_TOL = 1e-10
_ENTRY_TOL = 1e-12


def _as_square(a, name) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def cholesky_factor(sigma) -> np.ndarray:
    """Lower-triangular C with C @ C.T equal to ``sigma`` entrywise to 1e-10.

    The input is symmetrized as (A + A.T)/2 before factorization. A matrix
    that is not positive semidefinite within tolerance raises
    ``FactorizationError`` naming the failing leading minor.
    """
    sigma = _as_square(sigma, "sigma")
    sym = 0.5 * (sigma + sigma.T)
    try:
        chol = scipy.linalg.cholesky(sym, lower=True)
    except scipy.linalg.LinAlgError as exc:
        min_eig = float(np.linalg.eigvalsh(sym).min())
        if min_eig < -PSD_TOL:
            raise FactorizationError(
                f"covariance is not positive semidefinite ({exc}; "
                f"smallest eigenvalue {min_eig:.3e})"
            ) from exc
        # Semidefinite within tolerance: nudge onto the PD cone and retry.
        shift = max(0.0, -min_eig) + 1e-14
        chol = scipy.linalg.cholesky(sym + shift * np.eye(sym.shape[0]), lower=True)
    resid = float(np.abs(chol @ chol.T - sym).max())
    if resid > PSD_TOL:
        raise FactorizationError(f"factor round-trip residual {resid:.3e} exceeds {PSD_TOL}")
    return chol


@dataclass(frozen=True)
class NetworkParams:
    """Immutable (mu, sigma, refl)-specification of a reflected Brownian motion.

    ``chol`` is the lower-triangular factor of ``sigma`` and ``q`` the
    substochastic routing matrix with ``refl = I - q.T``.
    """

    d: int
    mu: np.ndarray
    sigma: np.ndarray
    refl: np.ndarray
    chol: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        for arr in (self.mu, self.sigma, self.refl, self.chol, self.q):
            arr.setflags(write=False)

    @classmethod
    def from_matrices(cls, mu, sigma, refl) -> "NetworkParams":
        """Validate and assemble a model from dense drift/covariance/reflection."""
        mu = np.asarray(mu, dtype=np.float64).reshape(-1)
        sigma = _as_square(sigma, "sigma")
        refl = np.ascontiguousarray(_as_square(refl, "refl"))
        d = mu.shape[0]
        if sigma.shape[0] != d or refl.shape[0] != d:
            raise ParameterError(
                f"inconsistent dimensions: mu has {d}, sigma {sigma.shape[0]}, refl {refl.shape[0]}"
            )
        if np.abs(sigma - sigma.T).max() > 1e-8:
            raise ParameterError("sigma must be symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        chol = cholesky_factor(sigma)

        q = np.eye(d) - refl.T
        if q.min() < -_ENTRY_TOL:
            raise ParameterError(
                f"I - refl.T has negative entries (min {q.min():.3e}); "
                "reflection matrix is not of substochastic-routing form"
            )
        row_sums = q.sum(axis=1)
        if row_sums.max() > 1.0 + _ENTRY_TOL:
            raise ParameterError(
                f"routing matrix row sums exceed 1 (max {row_sums.max():.12g}); not substochastic"
            )

        refl_inv = _invert_reflection(refl)
        if np.diag(refl_inv).min() < 1.0 - 1e-9:
            raise ParameterError("inverse reflection matrix has a diagonal entry below 1")
        drift_balance = refl_inv @ mu
        if drift_balance.max() >= 0.0:
            raise ParameterError(
                "stability condition fails: refl^-1 @ mu must be entrywise negative "
                f"(max entry {drift_balance.max():.6g})"
            )
        return cls(d=d, mu=mu, sigma=sigma, refl=refl, chol=chol, q=q)

    def refl_inverse(self) -> np.ndarray:
        return _invert_reflection(self.refl)


def _invert_reflection(refl) -> np.ndarray:
    try:
        inv = np.linalg.inv(refl)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("reflection matrix is singular; M-matrix condition fails") from exc
    if inv.min() < -_ENTRY_TOL:
        raise ParameterError(
            f"reflection inverse has negative entries (min {inv.min():.3e}); "
            "M-matrix condition fails"
        )
    return inv


def build_symmetric(d, beta, mu=None) -> NetworkParams:
    """Exchangeable test family with known stationary mean per station.

    Covariance has unit diagonal and off-diagonal -(1-beta)/(d-1); the
    reflection matrix has unit diagonal and off-diagonal -(1-beta)/(d-1).
    The drift defaults to -1 in every coordinate, the convention under which
    the closed-form stationary workload equals beta/2 (see
    ``steady_state_truth``). Pass ``mu`` to override.
    """
    if d < 2:
        raise ParameterError(f"symmetric family needs d >= 2 (coupling undefined at d={d})")
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"load parameter beta must lie in (0, 1), got {beta}")
    r = (1.0 - beta) / (d - 1)
    rho = -r
    sigma = np.full((d, d), rho)
    np.fill_diagonal(sigma, 1.0)
    refl = np.full((d, d), -r)
    np.fill_diagonal(refl, 1.0)
    if mu is None:
        mu = -np.ones(d)
    return NetworkParams.from_matrices(mu, sigma, refl)


def steady_state_truth(params: NetworkParams, beta) -> float:
    """Closed-form stationary workload per station for the symmetric family.

    Evaluates both the exchangeable-network expression and its simplification
    beta/2, and insists they agree to 1e-12 (guards against being handed a
    model that was not built by ``build_symmetric``).
    """
    d = params.d
    r = -float(params.refl[0, 1]) if d > 1 else 0.0
    rho = float(params.sigma[0, 1]) if d > 1 else 0.0
    long_form = (1.0 - (d - 2) * r + (d - 1) * r * rho) / (2.0 * (1.0 + r))
    short_form = 0.5 * beta
    if abs(long_form - short_form) > 1e-12:
        raise ParameterError(
            f"model is not the symmetric family for beta={beta}: "
            f"closed form gives {long_form!r}, beta/2 gives {short_form!r}"
        )
    return short_form


@dataclass(frozen=True)
class UniformityConstants:
    """Dimension-independent constants entering the uniformity assumptions."""

    beta0: float
    kappa0: float
    delta0: float
    b0: float
    lipschitz_f: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta0 < 1.0:
            raise ParameterError(f"beta0 must lie in (0, 1), got {self.beta0}")
        for name in ("kappa0", "delta0", "b0", "lipschitz_f"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ParameterError(f"{name} must be finite and positive, got {value}")

    @property
    def b1(self) -> float:
        """Bound on the sup-norm of refl^-1 applied to the all-ones vector."""
        return self.kappa0 / self.beta0


def symmetric_constants(beta, lipschitz_f=1.0) -> UniformityConstants:
    """Constants certifying the symmetric family: contraction rate beta, unit prefactor."""
    return UniformityConstants(beta0=beta, kappa0=1.0, delta0=1.0, b0=1.0, lipschitz_f=lipschitz_f)


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the uniformity checks with the margins that decided them."""

    a1_ok: bool
    a2_ok: bool
    a3_ok: bool
    a1_margin: float
    a2_margin: float
    a3_margins: tuple[float, float]
    a1_exact: bool = False

    @property
    def all_ok(self) -> bool:
        return self.a1_ok and self.a2_ok and self.a3_ok


def check_assumptions(params: NetworkParams, constants: UniformityConstants,
                      n_max: int = 64) -> AssumptionReport:
    """Verify uniform contraction, stability, and marginal-variance bounds.

    Contraction is checked through explicit powers of the routing matrix up
    to ``n_max`` (max column sum against kappa0 * (1 - beta0)^n).  When the
    column sums of the routing matrix are constant, the geometric decay is
    certified analytically for every power and ``a1_exact`` is set; otherwise
    only the finite-power margin is reported.
    """
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max}")
    q = params.q
    beta0, kappa0 = constants.beta0, constants.kappa0
    decay = 1.0 - beta0

    margin = 0.0
    power = q.copy()
    for n in range(1, n_max + 1):
        col_max = float(power.sum(axis=0).max())
        margin = max(margin, col_max / (kappa0 * decay**n))
        power = power @ q

    col_sums = q.sum(axis=0)
    exact = bool(np.ptp(col_sums) <= 1e-12) if params.d > 0 else False
    if exact:
        c = float(col_sums[0])
        if c > decay + 1e-15:
            margin = math.inf
        elif c > 0.0:
            # ratio (c/decay)^n / kappa0 is maximized at n = 1 once c <= decay
            margin = max(margin, c / (decay * kappa0))
    a1_ok = margin <= 1.0 + 1e-12

    drift_balance = params.refl_inverse() @ params.mu
    a2_margin = float((drift_balance + constants.delta0).max())
    a2_ok = a2_margin < 0.0

    variances = np.diag(params.sigma)
    a3_margins = (float(variances.min()), float(variances.max()))
    a3_ok = (a3_margins[0] >= 1.0 / constants.b0 - 1e-12
             and a3_margins[1] <= constants.b0 + 1e-12)

    return AssumptionReport(a1_ok=a1_ok, a2_ok=a2_ok, a3_ok=a3_ok,
                            a1_margin=margin, a2_margin=a2_margin,
                            a3_margins=a3_margins, a1_exact=exact)


def require_assumptions(params: NetworkParams, constants: UniformityConstants,
                        n_max: int = 64) -> AssumptionReport:
    """As ``check_assumptions`` but raising ``AssumptionError`` on any failure."""
    report = check_assumptions(params, constants, n_max=n_max)
    if not report.all_ok:
        failed = [name for name, ok in
                  (("A1", report.a1_ok), ("A2", report.a2_ok), ("A3", report.a3_ok)) if not ok]
        raise AssumptionError(
            f"uniformity assumptions failed: {', '.join(failed)} "
            f"(a1_margin={report.a1_margin:.6g}, a2_margin={report.a2_margin:.6g}, "
            f"a3_margins={report.a3_margins})"
        )
    return report


def load_network(path) -> NetworkParams:
    """Load a model from a JSON file.

    Two layouts are accepted: ``{"d": 10, "beta": 0.8}`` for the symmetric
    family (optional ``"mu"`` override), or explicit dense matrices
    ``{"mu": [...], "sigma": [[...]], "refl": [[...]]}`` in row-major order.
    """
    with open(path, "r", encoding="utf-8") as handle:
        try:
            spec = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed network config {path}: {exc}") from exc
    if "beta" in spec:
        if "d" not in spec:
            raise ParameterError("symmetric network config needs both 'd' and 'beta'")
        return build_symmetric(int(spec["d"]), float(spec["beta"]), mu=spec.get("mu"))
    missing = [key for key in ("mu", "sigma", "refl") if key not in spec]
    if missing:
        raise ParameterError(f"explicit network config missing keys: {', '.join(missing)}")
    return NetworkParams.from_matrices(spec["mu"], spec["sigma"], spec["refl"])
