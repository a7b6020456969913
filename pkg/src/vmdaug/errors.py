"""Exception hierarchy shared by all modules.

Argument-style errors also derive from ``ValueError`` so that callers who
only care about "bad input" can catch the builtin.
"""


class VmdaugError(Exception):
    """Base class for every error raised by this package."""


class ArgumentError(VmdaugError, ValueError):
    """A parameter is outside its documented domain."""


class FormatError(VmdaugError, ValueError):
    """A file could not be parsed into the expected layout."""


class DataError(VmdaugError, ValueError):
    """Numeric content violates an invariant (NaN/Inf, degenerate signal)."""


class LabelError(VmdaugError, ValueError):
    """A label token is unknown or a sample could not be labeled."""


class FitError(VmdaugError, ArithmeticError):
    """A model fit is numerically impossible (e.g. rank-deficient system)."""


class TrainingError(VmdaugError, RuntimeError):
    """Training cannot proceed (single-class data, non-finite gradients)."""


class InvariantError(VmdaugError, AssertionError):
    """An internal consistency check failed."""
