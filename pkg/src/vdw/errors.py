"""Exception hierarchy shared by every module."""


class VdwError(Exception):
    """Base class; the CLI maps these to exit code 1."""


class DomainError(VdwError, ValueError):
    """An argument violates a mathematical precondition."""


class ResourceLimitError(VdwError):
    """A request exceeds a configured size limit."""


class ValidationError(VdwError):
    """Redundant results disagree."""


class IntegrityError(VdwError):
    """A checkpoint or data file is corrupt."""


class SoundnessError(VdwError):
    """A claimed lower bound contradicts a known exact value."""
