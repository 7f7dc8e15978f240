"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised for malformed arrays, shapes or point sets."""


class InvalidParameterError(ValueError):
    """Raised when a scalar parameter is outside its admissible range."""


class PreconditionError(ValueError):
    """Raised when an operator-norm hypothesis of a solver is violated."""


class NumericError(ArithmeticError):
    """Raised when a linear-algebra backend fails to converge."""


class ConfigError(InvalidParameterError):
    """Raised for an invalid experiment configuration; the message names the field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DataFileError(InvalidInputError):
    """Raised when a data file cannot be parsed; the message cites the line."""
