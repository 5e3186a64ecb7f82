class ValidationError(ValueError):
    """Malformed input: bad pmf, bad access structure, inconsistent parameters."""


class GuardExceeded(ValueError):
    """An enumeration would exceed the desk-scale size guard."""


class SolverError(RuntimeError):
    """The LP backend did not return a usable status."""


class KeyExhausted(RuntimeError):
    """A one-time-pad key has fewer unused bits than requested."""
