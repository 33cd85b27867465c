"""Exception hierarchy shared by all framekit modules."""


class FramekitError(Exception):
    """Base class for every error raised by framekit."""


class ValidationError(FramekitError, ValueError):
    """Input data violates a documented precondition (shape, sign, ordering)."""


class MajorizationError(ValidationError):
    """A required majorization relation does not hold."""


class InterlacingError(ValidationError):
    """Two spectra fail to interlace."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InfeasibleError(ValidationError):
    """A target value lies outside the attainable range."""


class PreconditionError(ValidationError):
    """A test-helper precondition failed (distinct from the property under test)."""


class ConvergenceError(FramekitError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
