"""Error codes shared by all gallery modules.

Every failure surfaced to a caller is a :class:`GalleryError` carrying one of
the stable machine codes below.  The API layer maps codes to HTTP statuses;
nothing else should invent ad-hoc exception types.
"""

from __future__ import annotations


class GalleryError(Exception):
    """Base error with a stable machine-readable code."""

    code = "INTERNAL"

    def __init__(self, message: str = "", **context: object) -> None:
        super().__init__(message or self.code)
        self.message = message or self.code
        self.context = context


def _make(code_name: str, doc: str) -> type[GalleryError]:
    cls = type(code_name.title().replace("_", ""), (GalleryError,), {"code": code_name, "__doc__": doc})
    return cls


# model-core
InvalidTitle = _make("INVALID_TITLE", "Model title is empty.")
DuplicateKey = _make("DUPLICATE_KEY", "Derived model key collides after disambiguation limit.")
ForbiddenState = _make("FORBIDDEN_STATE", "Content edit attempted while the latest version is approved or rejected.")
ValidationFailed = _make("VALIDATION_FAILED", "Content violates document invariants.")

# access-control
WeakPassword = _make("WEAK_PASSWORD", "Password shorter than 8 characters.")
MalformedHash = _make("MALFORMED_HASH", "Stored password hash is not in the expected encoding.")
BadCredentials = _make("BAD_CREDENTIALS", "Unknown user or wrong password (single error, no enumeration).")
Unauthenticated = _make("UNAUTHENTICATED", "No valid credentials or session supplied.")
Forbidden = _make("FORBIDDEN", "The permission matrix denies this action.")
UnknownUser = _make("UNKNOWN_USER", "Referenced username does not exist.")
LastOwner = _make("LAST_OWNER", "Demoting the sole owner would leave the model ownerless.")

# workflow
IllegalState = _make("ILLEGAL_STATE", "Transition not legal from the current status.")
EmptyReviewText = _make("EMPTY_REVIEW_TEXT", "Reviewer verdicts require a nonempty review text.")

# storage
NotFound = _make("NOT_FOUND", "No such model, version, blob, or resource.")
CorruptBlob = _make("CORRUPT_BLOB", "Blob bytes do not match their content hash.")
IoFailure = _make("IO_FAILURE", "Underlying filesystem operation failed.")
SchemaMismatch = _make("SCHEMA_MISMATCH", "Document schema version differs from the store's current schema.")

# schema-migration
UnknownSchema = _make("UNKNOWN_SCHEMA", "No rule set registered for this schema version.")
ChainGap = _make("CHAIN_GAP", "Migration chain does not cover the requested range.")
MigrationFailed = _make("MIGRATION_FAILED", "Migration aborted; the store was left untouched.")
DuplicateStep = _make("DUPLICATE_STEP", "A migration with the same source version is already registered.")
NonadjacentStep = _make("NONADJACENT_STEP", "Migrations must go from version N to N+1.")

# api
PayloadTooLarge = _make("PAYLOAD_TOO_LARGE", "Upload exceeds the configured size limit.")
VersionConflict = _make("VERSION_CONFLICT", "Stale write: the model changed since the version the client last saw.")
BadRequest = _make("BAD_REQUEST", "Malformed request payload.")
ServiceMigrating = _make("SERVICE_MIGRATING", "Store is being migrated; retry shortly.")
