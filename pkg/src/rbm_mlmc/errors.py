"""Exception types shared across the package."""


class RbmMlmcError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(RbmMlmcError, ValueError):
    """Invalid model parameters, dimensions, or configuration values."""


class FactorizationError(ParameterError):
    """Covariance factorization failed; message names the failing leading minor."""


class AssumptionError(RbmMlmcError):
    """A model violates the uniformity assumptions required for estimation."""


class AlignmentError(RbmMlmcError, ValueError):
    """A time point or horizon does not lie on the required grid."""


class LcpConvergenceError(RbmMlmcError):
    """Active-set sweeps exceeded the iteration cap (non-M input suspected)."""

    def __init__(self, message, residual=None, step=None):
        super().__init__(message)
        self.residual = residual
        self.step = step


class LcpSubmatrixError(RbmMlmcError):
    """A principal submatrix of the reflection matrix was singular."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InsufficientDataError(RbmMlmcError, ValueError):
    """Not enough observations for the requested statistic."""
