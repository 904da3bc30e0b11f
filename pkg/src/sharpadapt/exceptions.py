"""Exception hierarchy shared by all modules."""


class SharpAdaptError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgumentError(SharpAdaptError, ValueError):
    """An argument violates an operation's precondition."""


class InfeasibleError(SharpAdaptError, ValueError):
    """The requested mathematical object does not exist for these inputs."""


class TuningInfeasibleError(InfeasibleError):
    """Tuning sequences violate the required sandwich inequality."""


class DegenerateError(SharpAdaptError, ValueError):
    """A normalisation is undefined, e.g. an all-zero weight vector."""
