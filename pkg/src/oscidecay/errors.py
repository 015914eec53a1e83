"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a numerical procedure fails to produce a trustworthy result."""


class NonFiniteError(NumericalError):
    """An integrand or matrix entry evaluated to NaN or infinity.

    Attributes
    ----------
    where : tuple
        Coordinates ``(u, v, t)`` of the first offending sample.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class NonConvergenceError(NumericalError):
    """Power iteration stopped at ``max_iter`` without meeting its tolerance."""

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
