"""Exception hierarchy."""


class CycleTimeError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(CycleTimeError, ValueError):
    """Invalid matrix, vector or model document."""


class CapExceededError(CycleTimeError):
    """An exhaustive enumeration would exceed its size cap."""


class UnsupportedLawError(CycleTimeError):
    """The requested analysis is not defined for this family of laws."""
