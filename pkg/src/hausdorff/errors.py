class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class PreconditionError(ValueError):
    """Raised when a documented precondition of an experiment is violated."""
