"""Exception hierarchy shared by every module."""


class DirlatError(Exception):
    """Base class; ``step`` names the pipeline stage that failed, when known."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"[{step}] {message}")
        self.step = step


class StructuralError(DirlatError, ValueError):
    """Malformed input: non-square matrix, negative entry, bad JSON shape."""


class PreconditionError(DirlatError, ValueError):
    pass


class CapacityError(DirlatError):
    """Instance exceeds a configured size cap (DP node count, guess count)."""


class InvariantError(DirlatError, AssertionError):
    """A certified inequality or internal contract failed at runtime."""
