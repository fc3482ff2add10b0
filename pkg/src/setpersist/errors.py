"""Exception types raised by the public API."""


class SetPersistError(Exception):
    """Base class for all library errors."""


class InvalidGrain(SetPersistError):
    """A grain has a non-positive or otherwise impossible parameter."""


class DegenerateSet(SetPersistError):
    """An operation requires both foreground and background pixels."""


class InvalidAngle(SetPersistError):
    """Sphere angle outside its admissible range."""


class GridMismatch(SetPersistError):
    """Curves that must share an argument grid do not."""


class InvalidInput(SetPersistError):
    """Malformed input (empty cloud, bad dimension, ...)."""


class InsufficientSample(SetPersistError):
    """Too few curves for outlier detection."""


class InsufficientSimulations(SetPersistError):
    """Too few simulations for the requested significance level."""


class InsufficientWindow(SetPersistError):
    """Test-set radius too large for the observation window."""


class InfeasibleIntensity(SetPersistError):
    """Requested hard-core intensity cannot be reached by thinning."""
