"""Exception types shared across the toolkit."""
from __future__ import annotations


class CrashvizError(Exception):
    """Base class for every error raised by this package."""


class MalformedDocument(CrashvizError):
    """Input bytes are not a syntactically valid record document."""


class SchemaViolation(CrashvizError):
    """A document violates the record or score-sheet schema.

    Carries the offending field name and, for tabular input, the 1-based
    row number.
    """

    def __init__(self, field: str, message: str | None = None, row: int | None = None):
        self.field = field
        self.row = row
        detail = message or f"invalid or missing field: {field}"
        if row is not None:
            detail = f"row {row}: {detail}"
        super().__init__(detail)


class DuplicateVehicleLabel(CrashvizError):
    """Both vehicles in a record carry the same label."""


class UnsupportedCode(CrashvizError):
    """Damage code outside the body-zone range 1..13."""


class NonLocalizedCode(UnsupportedCode):
    """Damage code 14..19: a real code, but with no body zone to place."""


class InvalidRecord(CrashvizError):
    """Record fails an invariant required by the requested operation."""


class MissingAnnotation(CrashvizError):
    """Image carries no embedded scene annotation (human channel required)."""


class MalformedAnnotation(CrashvizError):
    """Embedded scene annotation exists but cannot be decoded."""


class BackendError(CrashvizError):
    """Base class for generation-backend failures."""


class AuthMissing(BackendError):
    """Required auth token env var is unset or empty."""


class BackendUnreachable(BackendError):
    """Transient failures persisted through all retries."""


class BackendRejected(BackendError):
    """Backend rejected the request (4xx semantics); never retried."""


class InvalidResponse(BackendError):
    """Backend answered with a payload that is not an image."""


class MismatchedCase(CrashvizError):
    """Score sheets for different case/model pairs cannot be merged."""


class EmptyInput(CrashvizError):
    """Aggregation requires at least one score sheet."""


class ManifestWriteFailure(CrashvizError):
    """Run manifest could not be persisted."""


class BindFailure(CrashvizError):
    """HTTP service could not bind to the requested address."""
