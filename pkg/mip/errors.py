from typing import Optional


class ModelError(ValueError):
    """Raised when a model, variable or constraint fails validation."""


class MPSParseError(ModelError):
    """Raised when MPS text cannot be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class SolutionFileError(ModelError):
    """Raised when a `name value` solution file is malformed or does not match the model."""


class SolverError(RuntimeError):
    """Raised when the LP or MIP engine cannot produce a usable answer."""
