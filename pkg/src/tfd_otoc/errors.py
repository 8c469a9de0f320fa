"""Exception hierarchy shared by all modules."""


class OtocError(Exception):
    """Base class for errors raised by this package."""


class ArgumentError(OtocError, ValueError):
    pass


class CapacityError(ArgumentError):
    """A size guard was exceeded (qubit count, matrix dimension)."""


class DegeneracyError(ArgumentError):
    pass


class ReferenceNotFoundError(OtocError, LookupError):
    pass


class ConfigError(OtocError, ValueError):
    pass


class ConsistencyError(OtocError, RuntimeError):
    """An internal invariant failed, e.g. a Hermitian expectation came out complex."""


class NumericalError(OtocError, ArithmeticError):
    pass


class PostselectionStarvedError(OtocError, RuntimeError):
    pass
