"""Exception hierarchy shared by all modules."""


class GgptError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GgptError, ValueError):
    """Input does not satisfy a documented precondition."""


class SolverError(GgptError, RuntimeError):
    """A numerical routine failed to produce an answer."""


class DimensionMismatch(ValidationError):
    pass


class SingularFrameOperator(SolverError):
    pass


class SolverStalled(SolverError):
    pass


class NotAFrame(ValidationError):
    pass


class ZeroTraceEffect(ValidationError):
    pass


class InvalidMeasurement(ValidationError):
    pass


class PreconditionNotMet(ValidationError):
    pass


class UndefinedConditional(ValidationError):
    pass


class InconsistentScales(ValidationError):
    pass


class NotTightIC(ValidationError):
    pass


class ParamOutOfRange(ValidationError):
    pass


class BadWeights(ValidationError):
    pass
