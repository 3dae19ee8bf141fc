"""Exception types shared across the package."""


class InsufficientDataError(ValueError):
    """Raised when a sample is too small for the requested operation."""


class DegenerateDataError(ValueError):
    """Raised when a sample has no spread (zero sample standard deviation)."""


class DegenerateKernelError(ValueError):
    """Raised for selection kernels whose second moment is (numerically) zero.

    Such kernels are higher order and the bandwidth rescaling constant is
    undefined for them.
    """


class OptimizationFailureError(RuntimeError):
    """Raised when a numerical minimization fails to converge.

    Carries the best point found so far in ``best`` (or ``None``).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ProfileFailureError(RuntimeError):
    """Raised when every evaluation point of a local bandwidth profile fails."""
