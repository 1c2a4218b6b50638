class ExtractionError(ValueError):
    """A solution cannot be read back into a network."""


class NetFormatError(ValueError):
    """A serialized network file is malformed."""

    def __init__(self, message: str, line_number: int = 0):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}" if line_number else message)


class EvaluationError(ValueError):
    """A network cannot be scored on the given data."""
