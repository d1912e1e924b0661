"""Exception hierarchy shared by every module."""


class WarinessError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(WarinessError, ValueError):
    """A model parameter is non-finite or outside its admissible set."""


class DomainError(WarinessError, ValueError):
    """A function was evaluated outside its domain (e.g. ``k <= 0``)."""


class RangeError(DomainError):
    """An inverse was requested for a value outside the function's range."""


class UnsupportedCaseError(WarinessError):
    """The requested closed form does not exist for these parameters."""


class SolverError(WarinessError, RuntimeError):
    """A root or bracket search failed."""


class InvariantViolation(WarinessError, RuntimeError):
    """A structural assumption (e.g. a single-valued step) was broken."""


class CaseBoundaryError(WarinessError):
    """A threshold vanished under perturbation because the case changed."""


class ConfigError(WarinessError, ValueError):
    """A configuration file is malformed. ``path`` locates the bad field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
