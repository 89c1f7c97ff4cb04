"""Exception hierarchy shared across the package."""


class PpmatchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(PpmatchError, ValueError):
    """A scalar parameter is outside its admissible range."""


class DimensionMismatchError(PpmatchError, ValueError):
    """Matrix/permutation sizes do not agree."""


class InvalidInputError(PpmatchError, ValueError):
    """An input value violates a precondition (e.g. NaN cost entries)."""


class InfeasibleOverlapError(InvalidParameterError):
    """No permutation exists with the requested number of agreements."""


class InstanceTooLargeError(InvalidParameterError):
    """Exhaustive enumeration was requested for an instance that is too big."""


class NumericalError(PpmatchError, RuntimeError):
    """A numerical routine (eigendecomposition, ...) failed to converge."""


class InfeasibleRangeError(InvalidParameterError):
    """A computed parameter interval is empty."""


class ConfigError(PpmatchError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
