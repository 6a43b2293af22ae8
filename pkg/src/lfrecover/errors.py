"""Exception hierarchy shared across the package.

The CLI maps each class to a distinct exit code, so library code should
raise the most specific type that applies.
"""


class LfrecoverError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LfrecoverError):
    """Arguments violate a documented precondition."""


class DomainError(ParameterError):
    """A value lies outside the domain of an operation (e.g. log of zero)."""


class UnsupportedError(ParameterError):
    """Input is valid but falls in a regime this build does not implement."""


class InconsistentInputError(LfrecoverError):
    """Data cannot have come from a well-formed instance."""


class ResourceCapError(LfrecoverError):
    """A desk-scale enumeration cap would be exceeded."""


class NotFoundError(ResourceCapError):
    """A bounded search ran out of budget before finding a witness."""


class InternalError(LfrecoverError):
    """An internal invariant failed; raising this indicates a bug."""
