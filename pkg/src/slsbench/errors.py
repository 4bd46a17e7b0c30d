"""Exception types shared across the harness.

Validation violations are ordinary data (see platforms.ValidationReport);
exceptions are reserved for conditions that stop an operation outright.
"""


class SlsBenchError(Exception):
    """Base class for all harness errors."""


class ConfigurationError(SlsBenchError):
    """Required configuration (rate card, endpoint, model file) is missing or malformed."""


class NoValidMemoryError(SlsBenchError):
    """Requested memory exceeds the largest value the platform grid offers."""


class UnsupportedQueryError(SlsBenchError):
    """The profile or provider cannot answer this query (e.g. no CPU data, no log API)."""


class PreconditionError(SlsBenchError):
    """An operation was invoked with its documented precondition unmet."""


class NotFoundError(SlsBenchError):
    """Unknown handle, function, or object key."""


class ProviderError(SlsBenchError):
    """The provider rejected or failed an operation; message carries its verbatim reason."""


class PackagingError(SlsBenchError):
    """A package could not be built (missing handler, unreadable directory, bad padding)."""


class SchemaError(SlsBenchError):
    """A result document is missing a field its schema requires."""

    def __init__(self, field: str, message: str | None = None):
        self.field = field
        super().__init__(message or f"required field missing from result: {field!r}")


class EmptyGroupError(SlsBenchError):
    """Statistics were requested over an empty value list."""
