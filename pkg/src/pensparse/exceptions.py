class NumericalError(RuntimeError):
    """A numeric procedure failed (singular system, bracket expansion, ...)."""
