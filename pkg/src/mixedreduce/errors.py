"""Exception types shared across the package."""


class MixedReduceError(Exception):
    """Base class for errors raised by this package."""


class DataError(MixedReduceError):
    """The data violates a precondition (bad schema, ragged rows,
    constant column, fully-missing column, ...)."""


class MissingValueError(DataError):
    """A masked cell was read as if it held a value."""
