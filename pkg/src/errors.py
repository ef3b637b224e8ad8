"""Exception hierarchy shared by every module."""
from typing import Optional


class ForgetMIError(Exception):
    """Root of all errors raised by the lab."""


class ShapeError(ForgetMIError, ValueError):
    """Tensor shapes are incompatible with the requested operation."""


class InvalidInputError(ForgetMIError, ValueError):
    """An argument violates a documented precondition."""


class ContractError(ForgetMIError, ValueError):
    """Two arguments that must agree (batch sizes, architectures) do not."""


class NumericError(ForgetMIError, ArithmeticError):
    """A loss or gradient became NaN or infinite."""


class UndefinedMetricError(ForgetMIError, ValueError):
    """A metric cannot be computed for the given labels."""


class CheckpointError(ForgetMIError, ValueError):
    """A checkpoint file is malformed or has an unsupported version."""


class ParseError(ForgetMIError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        super().__init__(message)
        self.line_number = line_number


class ConfigError(ForgetMIError, ValueError):
    """An experiment config file failed validation."""

    def __init__(self, message: str, field_path: str = ""):
        super().__init__(f"{field_path}: {message}" if field_path else message)
        self.field_path = field_path
