"""Exception types raised by the biphoton toolkit."""


class BiphotonError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(BiphotonError, ValueError):
    """A physical or numerical parameter is out of its valid range."""


class BasisMismatchError(BiphotonError):
    """An operation received a state or profile in the wrong basis/domain."""


class GridTooSmallError(BiphotonError):
    """Probability has leaked to the grid boundary (aliasing risk).

    Attributes
    ----------
    leakage : float
        Fraction of total probability found within the guard frame.
    """

    def __init__(self, message, leakage):
        super().__init__(message)
        self.leakage = leakage


class InsufficientOrderError(BiphotonError):
    """A phase expansion was requested beyond the stored polynomial order."""


class ScanRangeError(BiphotonError):
    """A slit window or object mask extends outside the sampled grid."""


class FitConvergenceError(BiphotonError):
    """The maximum-likelihood fit did not converge within the iteration cap.

    Attributes
    ----------
    last_params : ndarray
        Internal parameter vector at the last iterate, for diagnostics.
    grad_norm : float
        Gradient norm at the last iterate.
    """

    def __init__(self, message, last_params=None, grad_norm=None):
        super().__init__(message)
        self.last_params = last_params
        self.grad_norm = grad_norm


class SingularFitError(BiphotonError):
    """The count pattern is degenerate (e.g. rank-1) and cannot be fitted."""


class UnstableFitError(BiphotonError):
    """Too many Monte Carlo resample fits failed for a reliable error bar."""


class PeriodEstimationError(BiphotonError):
    """No dominant modulation frequency could be identified in a trace."""


class ConfigError(BiphotonError):
    """A scenario configuration file is malformed or inconsistent."""
