"""Exception hierarchy shared by all modules."""


class QcorrError(Exception):
    """Base class for library errors."""


class ValidationError(QcorrError, ValueError):
    """An input violates a documented invariant."""


class LabelError(ValidationError):
    """Unknown or duplicated subsystem label."""


class SolverError(QcorrError, RuntimeError):
    """A root finder found no bracket inside its scan window."""


class TruncationError(QcorrError, RuntimeError):
    """Population reached the top of a truncated Fock space."""


class DegenerateBranchError(QcorrError, ValueError):
    """A measurement branch has (numerically) zero weight."""


class ProtocolError(QcorrError, RuntimeError):
    """A simulation step was invoked out of order."""


class PreconditionError(QcorrError, ValueError):
    """A state or code does not satisfy an operation's precondition."""
