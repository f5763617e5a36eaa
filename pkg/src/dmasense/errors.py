"""Exception types shared across the package."""


class DmaSenseError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(DmaSenseError, ValueError):
    """An argument violates a documented precondition."""


class InvalidConfigurationError(DmaSenseError, ValueError):
    """A derived working set (direction subset, search set, ...) came out empty
    or otherwise unusable."""


class SingularModelError(DmaSenseError, RuntimeError):
    """The loaded-network system matrix is singular or too ill-conditioned to
    solve reliably.  Carries the reciprocal condition estimate."""

    def __init__(self, message: str, rcond: float = 0.0):
        super().__init__(message)
        self.rcond = float(rcond)


class DegenerateMeasurementError(DmaSenseError, ValueError):
    """The measurement vector has zero norm; projection scores are undefined."""


class NoSignalError(DmaSenseError, RuntimeError):
    """Every candidate dictionary over the search set is identically zero."""


class SecondSourceUndetectableError(DmaSenseError, RuntimeError):
    """The residual after cancelling the strongest source is numerically zero,
    so no second source can be extracted from it."""
