"""Domain errors raised by the pipeline.

The CLI maps every subclass of :class:`AerodeployError` to exit code 1 and
prints the class name on stderr, so the names are part of the interface.
"""


class AerodeployError(Exception):
    """Base class for all domain errors."""


class LengthMismatch(AerodeployError, ValueError):
    pass


class TooShort(AerodeployError, ValueError):
    pass


class InsufficientPairs(AerodeployError, ValueError):
    pass


class DegenerateMotion(AerodeployError, ValueError):
    pass


class EmptyTrajectory(AerodeployError, ValueError):
    pass


class ClassAbsent(AerodeployError, KeyError):
    pass


class EmptyCloud(AerodeployError, ValueError):
    pass


class OutOfBounds(AerodeployError, IndexError):
    pass


class ConfigInvalid(AerodeployError, ValueError):
    pass


class DegenerateLabels(AerodeployError, ValueError):
    pass


class GoalOutOfBounds(AerodeployError, ValueError):
    pass


class NoCandidates(AerodeployError):
    pass


class UnknownScene(AerodeployError, ValueError):
    pass


class MalformedInput(AerodeployError, ValueError):
    """A file or array could not be parsed into a valid value."""
