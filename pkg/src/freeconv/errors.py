"""Exception types raised across the package."""


class FreeconvError(Exception):
    """Base class."""


class DomainError(FreeconvError, ValueError):
    """Argument outside the half-plane or interval an operation is defined on."""


class ParameterError(FreeconvError, ValueError):
    """Stability index, asymmetry or weight outside its admissible range."""


class AtomicMeasureError(FreeconvError, ValueError):
    """The measure is a point mass and has no density."""


class PreconditionError(FreeconvError, ValueError):
    """An operation was requested on an input it does not accept."""


class InversionError(FreeconvError, RuntimeError):
    """Newton inversion or continuation failed.

    ``last`` holds the last iterate(s) and ``residual`` the residual(s) reached.
    """

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class ConvergenceError(FreeconvError, RuntimeError):
    """A fixed-point or extrapolation scheme did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class QuadratureError(FreeconvError, RuntimeError):
    """Adaptive quadrature stopped above its error target."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
