"""Exception types shared across modules."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; results must not be trusted."""


class InputError(ValueError):
    """Bad user input (ring file, bounds, options)."""
