class TrainingError(RuntimeError):
    """A training run could not finish; `trace` holds what was completed."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
