"""Exception hierarchy shared by all kdmatch modules."""


class KDMatchError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(KDMatchError, ValueError):
    """Raised when (k, d, b) or an index lies outside its admissible range."""


class PoleError(KDMatchError, ZeroDivisionError):
    """A Pochhammer denominator vanished while summing a hypergeometric series."""


class ConfigurationError(KDMatchError):
    """A policy was asked to run on an instance it cannot handle."""


class InstanceFormatError(KDMatchError, ValueError):
    """Malformed instance file or structurally invalid instance."""


class BoundViolation(KDMatchError, ArithmeticError):
    """An exact inequality that must hold was found to fail."""
