class InvariantError(RuntimeError):
    """An internal invariant failed; indicates a bug rather than bad input."""
