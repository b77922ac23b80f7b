"""Exception hierarchy shared by the library and the command-line front end."""


class StlfError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(StlfError, ValueError):
    """Invalid parameters or configuration."""

    exit_code = 2


class DataError(StlfError, ValueError):
    """Malformed, non-finite, or otherwise unusable input data."""

    exit_code = 3


class SizingError(DataError):
    """A series or window is too short for the requested operation."""


class ShapeError(DataError):
    """Array dimensions do not match what the operation expects."""


class NumericalError(StlfError, ArithmeticError):
    """A linear system could not be solved to the required accuracy."""

    exit_code = 4


class StateError(StlfError, RuntimeError):
    """An object was used before it reached the required state (e.g. unfitted)."""

    exit_code = 1


class ArtifactError(StlfError, OSError):
    """Reading or writing a file failed or the file is incompatible."""

    exit_code = 5
