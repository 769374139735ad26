class InvalidInputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class ResourceLimitError(RuntimeError):
    """Raised instead of silently truncating a computation that exceeds its budget.

    ``partial`` carries whatever was computed before the limit was hit, if the
    operation has a meaningful partial result.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvariantError(AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""
