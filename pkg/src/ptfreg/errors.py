"""Exception types shared across the package."""


class PTFError(Exception):
    """Base class for all errors raised by ptfreg."""


class InvalidInputError(PTFError, ValueError):
    """An argument violates an operation's precondition."""


class DegenerateInputError(InvalidInputError):
    """The polynomial is constant (zero variance) where a non-constant one is required."""


class ResourceLimitError(PTFError, RuntimeError):
    """The requested computation exceeds the configured enumeration budget."""


class InternalError(PTFError, AssertionError):
    """A self-check failed; this indicates a bug rather than bad input."""
