"""Exception types shared across the package."""


class MalformedWordError(ValueError):
    """A letter refers to a generator that does not exist."""


class DomainError(ValueError):
    """Operands do not live in the same group, or a path is not well formed."""


class ValidationError(ValueError):
    """A structural check (graph, measure, quotient) failed."""


class ResourceError(RuntimeError):
    """An enumeration exceeded its memory guard.

    ``count`` holds the number of items produced before giving up.
    """

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count
