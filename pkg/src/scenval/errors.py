"""Exception hierarchy shared by all validators."""


class ScenvalError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ScenvalError):
    """Invalid configuration or arguments."""


class DataError(ScenvalError):
    """Input data violates a precondition (shape, finiteness, ...)."""


class ParseError(DataError):
    """A CSV file could not be parsed.

    ``row`` and ``column`` are 1-based positions in the file.
    """

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class DegenerateError(DataError):
    """Raised when an estimator is undefined for the input (zero variance)."""


class EmptySetError(DataError):
    """Cleaning removed every scenario."""
