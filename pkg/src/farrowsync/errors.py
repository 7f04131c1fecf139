"""Exception types shared across the package."""


class FarrowSyncError(Exception):
    """Base class for all library-specific errors."""


class InvalidOrderError(FarrowSyncError, ValueError):
    """Polynomial order outside the supported range."""


class InsufficientSamplesError(FarrowSyncError, ValueError):
    """Input sequence too short for the requested operation."""


class DelayRangeError(FarrowSyncError, ValueError):
    """Fractional delay left the admissible range.

    Carries the first offending sample index in ``index``.
    """

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class SingularHessianError(FarrowSyncError, ArithmeticError):
    """Hessian determinant below the configured floor (degenerate excitation)."""


class EmptyChainError(FarrowSyncError, ValueError):
    """Accumulator chain queried before any sample was pushed."""


class ParameterError(FarrowSyncError, ValueError):
    """Invalid parameter value for signal generation or metrics."""
