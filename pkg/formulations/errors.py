class FormulationError(ValueError):
    """Raised when a model cannot be built from the given data, architecture or constants."""
