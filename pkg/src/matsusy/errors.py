"""Exception hierarchy shared by the numerical modules and the runner."""


class MatsusyError(Exception):
    """Base class for all package errors."""


class PoleError(MatsusyError, ValueError):
    """Evaluation point sits on (or numerically at) a singularity."""


class DomainError(MatsusyError, ValueError):
    """Evaluation point or grid leaves the model's validity window."""


class SingularMatrixError(MatsusyError, ValueError):
    pass


class NotShapeInvariantError(MatsusyError):
    """The partner difference is not a constant multiple of the identity."""


class ConvergenceError(MatsusyError):
    pass


class StiffnessError(MatsusyError):
    pass


class EmptyLadderError(MatsusyError):
    pass


class ZeroNormError(MatsusyError, ValueError):
    pass


class ConfigError(MatsusyError, ValueError):
    pass
