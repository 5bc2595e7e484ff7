"""Exception hierarchy shared by all modules."""


class CutoutError(Exception):
    """Base class for errors raised by this package."""


class InvalidSpaceError(CutoutError, ValueError):
    """The space description violates a structural requirement."""


class DomainError(CutoutError, ValueError):
    """A point or argument lies outside the domain of an operation."""


class ToleranceError(CutoutError, ArithmeticError):
    """A numerical routine could not reach its requested tolerance.

    The best estimate and the achieved error bound are attached so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message, estimate=None, bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.bound = bound


class UnsupportedSpaceError(CutoutError, NotImplementedError):
    """The operation is only implemented for a subclass of spaces."""


class ConsistencyError(CutoutError, RuntimeError):
    """Two independent computations of the same quantity disagree."""


class ResourceError(CutoutError, MemoryError):
    """A requested depth or size exceeds the configured budget."""
