"""Domain model for gallery documents.

A *model* is a described collection of media objects with a contiguous
version history.  This module holds the value types (versions, descriptions,
media objects, references), the rich-text command scanner, reference
rendering, structural validation, and the pure helpers that build new
versions.  Everything here is immutable and side-effect free; persistence and
state transitions live in :mod:`gallery.storage` and :mod:`gallery.workflow`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from enum import Enum
from typing import Callable, Iterable, Sequence

from .errors import DuplicateKey, ForbiddenState, InvalidTitle

KEY_RE = re.compile(r"^[a-z0-9][a-z0-9_-]{2,63}$")
USERNAME_RE = re.compile(r"^[a-z0-9_.-]{2,32}$")
IDENT_RE = re.compile(r"^[A-Za-z0-9_:-]+$")
BLOB_ID_RE = re.compile(r"^[0-9a-f]{64}$")

MAX_KEY_LEN = 64
KEY_SUFFIX_LIMIT = 99
DEFAULT_LICENSE = "CC BY-SA 4.0"
CURRENT_SCHEMA = 2


class Status(str, Enum):
    """Life-cycle state of one model version."""

    EDIT = "edit"
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"


def now_utc() -> datetime:
    """Current UTC time truncated to whole seconds (store resolution)."""
    return datetime.now(timezone.utc).replace(microsecond=0)


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuthorRef:
    """One entry of the ordered author list."""

    name: str
    position: int
    affiliation: str | None = None


@dataclass(frozen=True)
class Reference:
    """A literature reference: a citation key plus ordered key/value attributes."""

    ref_key: str
    entry_type: str
    attributes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(tuple(kv) for kv in self.attributes))

    def get(self, name: str) -> str | None:
        for k, v in self.attributes:
            if k == name:
                return v
        return None


@dataclass(frozen=True)
class FileRef:
    """Link from a media object to one content-addressed data file."""

    blob_id: str
    filename: str
    media_type: str
    size_bytes: int


@dataclass(frozen=True)
class MediaObject:
    """A titled set of data files realizing one view of a model.

    ``preview`` is the blob id of the image shown inline for this media
    object, normally the blob of one of its raster files.
    """

    media_id: str
    title: str
    text: str
    files: tuple[FileRef, ...]
    preview: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "files", tuple(self.files))


@dataclass(frozen=True)
class Description:
    """Descriptive metadata of one model version (the date is derived from
    the version's creation timestamp, see :attr:`ModelVersion.date`)."""

    title: str
    authors: tuple[AuthorRef, ...]
    text: str = ""
    keywords: frozenset[str] = frozenset()
    references: tuple[Reference, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "authors", tuple(self.authors))
        object.__setattr__(self, "keywords", frozenset(self.keywords))
        object.__setattr__(self, "references", tuple(self.references))


@dataclass(frozen=True)
class ModelVersion:
    """One immutable content snapshot of a model."""

    key: str
    version: int
    status: Status
    edited_by: str
    schema_version: int
    description: Description
    media: tuple[MediaObject, ...]
    created_at: datetime
    license: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "media", tuple(self.media))

    @property
    def date(self) -> date:
        """Creation date of this version (the description's date field)."""
        return self.created_at.date()

    def media_ids(self) -> set[str]:
        return {m.media_id for m in self.media}

    def blob_ids(self) -> set[str]:
        """Every blob referenced by this version, previews included."""
        out: set[str] = set()
        for m in self.media:
            out.update(f.blob_id for f in m.files)
            if m.preview is not None:
                out.add(m.preview)
        return out


@dataclass(frozen=True)
class ModelHistory:
    """Complete history of one model plus its access-control lists.

    Versions are numbered 1..n contiguously.  Only the latest version is
    live: all status transitions and content edits target it; superseded
    versions are frozen snapshots.
    """

    key: str
    versions: tuple[ModelVersion, ...]
    owners: frozenset[str]
    editors: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "versions", tuple(self.versions))
        object.__setattr__(self, "owners", frozenset(self.owners))
        object.__setattr__(self, "editors", frozenset(self.editors))

    @property
    def latest(self) -> ModelVersion:
        return self.versions[-1]

    def get_version(self, number: int) -> ModelVersion | None:
        if 1 <= number <= len(self.versions):
            return self.versions[number - 1]
        return None

    def has_approved(self) -> bool:
        return any(v.status is Status.APPROVED for v in self.versions)


def current_public_version(history: ModelHistory) -> ModelVersion | None:
    """Highest-numbered APPROVED version, or None if nothing is published."""
    for v in reversed(history.versions):
        if v.status is Status.APPROVED:
            return v
    return None


# ---------------------------------------------------------------------------
# Rich text
# ---------------------------------------------------------------------------


class TokenKind(str, Enum):
    TEXT = "text"
    CITE = "cite"
    MEDIA = "media"


@dataclass(frozen=True)
class RichTextToken:
    kind: TokenKind
    payload: str


_COMMANDS = {"cite": TokenKind.CITE, "media": TokenKind.MEDIA}
_ARG_CHARS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_:-")


def parse_rich_text(text: str) -> list[RichTextToken]:
    """Greedy left-to-right scan for ``\\cite{...}`` and ``\\media{...}``.

    Arguments must match ``[A-Za-z0-9_:-]+``; anything else, including
    malformed commands, passes through as literal text.  Re-serializing the
    token list reproduces the input byte for byte.
    """
    tokens: list[RichTextToken] = []
    buf: list[str] = []
    i, n = 0, len(text)
    while i < n:
        if text[i] == "\\":
            match = _scan_command(text, i)
            if match is not None:
                kind, arg, end = match
                if buf:
                    tokens.append(RichTextToken(TokenKind.TEXT, "".join(buf)))
                    buf.clear()
                tokens.append(RichTextToken(kind, arg))
                i = end
                continue
        buf.append(text[i])
        i += 1
    if buf:
        tokens.append(RichTextToken(TokenKind.TEXT, "".join(buf)))
    return tokens


def _scan_command(text: str, start: int) -> tuple[TokenKind, str, int] | None:
    # start points at the backslash
    for name, kind in _COMMANDS.items():
        head = "\\" + name + "{"
        if not text.startswith(head, start):
            continue
        j = start + len(head)
        k = j
        while k < len(text) and text[k] in _ARG_CHARS:
            k += 1
        if k > j and k < len(text) and text[k] == "}":
            return kind, text[j:k], k + 1
    return None


def serialize_rich_text(tokens: Iterable[RichTextToken]) -> str:
    parts = []
    for t in tokens:
        if t.kind is TokenKind.TEXT:
            parts.append(t.payload)
        else:
            parts.append("\\%s{%s}" % (t.kind.value, t.payload))
    return "".join(parts)


def cited_keys(text: str) -> list[str]:
    return [t.payload for t in parse_rich_text(text) if t.kind is TokenKind.CITE]


def embedded_media(text: str) -> list[str]:
    return [t.payload for t in parse_rich_text(text) if t.kind is TokenKind.MEDIA]


# ---------------------------------------------------------------------------
# Reference rendering
# ---------------------------------------------------------------------------


def render_reference(ref: Reference) -> str:
    """Render a reference in the fixed plain style.

    Field order: author, title, venue (journal or booktitle) with volume,
    number, pages, then publisher and year.  Absent fields are skipped and
    the result ends with exactly one period.  A reference without attributes
    renders as ``[ref_key].``.
    """
    if not ref.attributes:
        return "[%s]." % ref.ref_key
    sentences: list[str] = []
    author = ref.get("author")
    if author:
        sentences.append(author)
    title = ref.get("title")
    if title:
        sentences.append(title)
    tail = _render_tail(ref)
    if tail:
        sentences.append(tail)
    if not sentences:
        return "[%s]." % ref.ref_key
    return " ".join(s if s.endswith(".") else s + "." for s in sentences)


def _render_tail(ref: Reference) -> str:
    tail = ref.get("journal") or ref.get("booktitle") or ""
    volume = ref.get("volume")
    if volume:
        tail += (", " if tail else "") + volume
        number = ref.get("number")
        if number:
            tail += "(%s)" % number
    pages = ref.get("pages")
    if pages:
        tail += (":" if tail else "") + pages
    for name in ("publisher", "year"):
        value = ref.get(name)
        if value:
            tail += (", " if tail else "") + value
    return tail


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of structural validation; empty violations means valid."""

    key: str
    version: int
    violations: tuple[Violation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "violations",
            tuple(sorted(self.violations, key=lambda v: (v.path, v.code, v.message))),
        )

    @property
    def ok(self) -> bool:
        return not self.violations


# XML 1.0 cannot represent most control characters or lone surrogates at all,
# so text that would be unserializable is a validation error.
_XML_ILLEGAL = re.compile(
    "[" + "\x00-\x08\x0b\x0c\x0e-\x1f" + "\ud800-\udfff" + "￾￿" + "]"
)


def xml_illegal_chars(text: str) -> bool:
    return bool(_XML_ILLEGAL.search(text))


def validate_version(
    v: ModelVersion,
    blob_exists: Callable[[str], bool] | None = None,
) -> ValidationReport:
    """Report every violated structural invariant of a version.

    Pure and idempotent: never raises, never mutates.  ``blob_exists`` is
    supplied at persist time to check that file references resolve; without
    it blob existence is not checked.
    """
    out: list[Violation] = []

    def bad(code: str, path: str, message: str) -> None:
        out.append(Violation(code, path, message))

    if not KEY_RE.match(v.key):
        bad("BAD_KEY", "/model/@key", "key %r does not match the key pattern" % v.key)
    if v.version < 1:
        bad("BAD_VERSION", "/model/@version", "version must be >= 1")
    if not isinstance(v.status, Status):
        bad("UNKNOWN_STATUS", "/model/@status", "status %r is not a known status" % (v.status,))
    if not USERNAME_RE.match(v.edited_by or ""):
        bad("BAD_USERNAME", "/model/@edited-by", "edited-by %r is not a valid username" % v.edited_by)
    if v.schema_version < 1:
        bad("BAD_SCHEMA", "/model/@schema", "schema version must be >= 1")
    if v.schema_version >= 2 and not v.license:
        bad("MISSING_LICENSE", "/model/license", "schema >= 2 requires a license")
    if v.schema_version == 1 and v.license is not None:
        bad("UNEXPECTED_LICENSE", "/model/license", "schema 1 has no license element")

    d = v.description
    if not d.title:
        bad("EMPTY_TITLE", "/model/description/title", "title must be nonempty")
    _check_text("/model/description/title", d.title, bad)
    _check_text("/model/description/text", d.text, bad)
    if not d.authors:
        bad("EMPTY_AUTHORS", "/model/description/authors", "at least one author is required")
    positions = sorted(a.position for a in d.authors)
    if positions != list(range(len(d.authors))):
        bad(
            "BAD_AUTHOR_POSITIONS",
            "/model/description/authors",
            "positions must be 0..n-1 without gaps, got %s" % positions,
        )
    for idx, a in enumerate(d.authors):
        apath = "/model/description/authors/author[%d]" % (idx + 1)
        if not a.name:
            bad("EMPTY_AUTHOR_NAME", apath, "author name must be nonempty")
        _check_text(apath, a.name, bad)
        if a.affiliation is not None:
            _check_text(apath + "/@affiliation", a.affiliation, bad)
    for kw in d.keywords:
        _check_text("/model/description/keywords", kw, bad)

    seen_refs: set[str] = set()
    for idx, r in enumerate(d.references):
        rpath = "/model/description/references/reference[%d]" % (idx + 1)
        if not IDENT_RE.match(r.ref_key):
            bad("BAD_REF_KEY", rpath + "/@key", "reference key %r has illegal characters" % r.ref_key)
        if r.ref_key in seen_refs:
            bad("DUPLICATE_REF_KEY", rpath + "/@key", "reference key %r is not unique" % r.ref_key)
        seen_refs.add(r.ref_key)
        _check_text(rpath + "/@type", r.entry_type, bad)
        for name, value in r.attributes:
            _check_text(rpath + "/attr", name, bad)
            _check_text(rpath + "/attr", value, bad)

    media_ids: set[str] = set()
    for idx, m in enumerate(v.media):
        mpath = "/model/media-objects/media-object[%d]" % (idx + 1)
        if not IDENT_RE.match(m.media_id):
            bad("BAD_MEDIA_ID", mpath + "/@id", "media id %r has illegal characters" % m.media_id)
        if m.media_id in media_ids:
            bad("DUPLICATE_MEDIA_ID", mpath + "/@id", "media id %r is not unique" % m.media_id)
        media_ids.add(m.media_id)
        _check_text(mpath + "/title", m.title, bad)
        _check_text(mpath + "/text", m.text, bad)
        if not m.files:
            bad("EMPTY_MEDIA_FILES", mpath, "media object %r has no files" % m.media_id)
        for fdx, f in enumerate(m.files):
            fpath = mpath + "/file[%d]" % (fdx + 1)
            if not BLOB_ID_RE.match(f.blob_id):
                bad("BAD_BLOB_ID", fpath + "/@blob", "blob id %r is not a sha-256 hex digest" % f.blob_id)
            elif blob_exists is not None and not blob_exists(f.blob_id):
                bad("DANGLING_BLOB", fpath + "/@blob", "blob %s does not exist" % f.blob_id)
            if "/" in f.filename or "\\" in f.filename or not f.filename:
                bad("BAD_FILENAME", fpath + "/@name", "filename %r is empty or has path separators" % f.filename)
            _check_text(fpath + "/@name", f.filename, bad)
            _check_text(fpath + "/@type", f.media_type, bad)
            if f.size_bytes < 0:
                bad("NEGATIVE_SIZE", fpath + "/@size", "size must be >= 0")
        if m.preview is not None:
            ppath = mpath + "/preview/@blob"
            if not BLOB_ID_RE.match(m.preview):
                bad("BAD_BLOB_ID", ppath, "blob id %r is not a sha-256 hex digest" % m.preview)
            elif blob_exists is not None and not blob_exists(m.preview):
                bad("DANGLING_BLOB", ppath, "blob %s does not exist" % m.preview)

    for cite in cited_keys(d.text):
        if cite not in seen_refs:
            bad("DANGLING_CITE", "/model/description/text", "\\cite{%s} has no matching reference" % cite)
    for mid in embedded_media(d.text):
        if mid not in media_ids:
            bad("DANGLING_MEDIA", "/model/description/text", "\\media{%s} has no matching media object" % mid)

    if v.license is not None:
        _check_text("/model/license", v.license, bad)

    return ValidationReport(v.key, v.version, tuple(out))


def _check_text(path: str, text: str, bad: Callable[[str, str, str], None]) -> None:
    if xml_illegal_chars(text):
        bad("ILLEGAL_XML_CHAR", path, "text contains characters XML cannot represent")


# ---------------------------------------------------------------------------
# Key derivation and version builders
# ---------------------------------------------------------------------------


def derive_key(title: str) -> str:
    """Slug for a model key: lowercase, non-alphanumeric runs to ``_``,
    trimmed, truncated to 64, right-padded with ``0`` up to 3 chars."""
    slug = re.sub(r"[^a-z0-9]+", "_", title.lower()).strip("_")
    slug = slug[:MAX_KEY_LEN]
    if len(slug) < 3:
        slug = slug.ljust(3, "0")
    return slug


def unique_key(title: str, existing: Iterable[str]) -> str:
    """Derived key, disambiguated against ``existing`` with _2.._99 suffixes."""
    taken = set(existing)
    base = derive_key(title)
    if base not in taken:
        return base
    for n in range(2, KEY_SUFFIX_LIMIT + 1):
        suffix = "_%d" % n
        candidate = base[: MAX_KEY_LEN - len(suffix)] + suffix
        if candidate not in taken:
            return candidate
    raise DuplicateKey("no free key for title %r after %d suffixes" % (title, KEY_SUFFIX_LIMIT))


def new_history(
    title: str,
    creator: str,
    existing_keys: Iterable[str],
    schema_version: int,
    key: str | None = None,
    created_at: datetime | None = None,
    creator_display: str | None = None,
) -> ModelHistory:
    """Fresh single-version history in EDIT state with the creator as sole owner.

    The key is derived from the title unless an explicit (pre-validated) key
    is supplied, as the seed fixtures do.  The author list starts with the
    creator so a fresh version already satisfies the nonempty-authors rule.
    """
    if not title:
        raise InvalidTitle("model title must be nonempty")
    if key is None:
        key = unique_key(title, existing_keys)
    elif key in set(existing_keys):
        raise DuplicateKey("key %r already exists" % key)
    author = AuthorRef(name=creator_display or creator, position=0)
    v1 = ModelVersion(
        key=key,
        version=1,
        status=Status.EDIT,
        edited_by=creator,
        schema_version=schema_version,
        description=Description(title=title, authors=(author,)),
        media=(),
        created_at=created_at or now_utc(),
        license=DEFAULT_LICENSE if schema_version >= 2 else None,
    )
    return ModelHistory(key=key, versions=(v1,), owners=frozenset({creator}))


def next_version(
    history: ModelHistory,
    actor: str,
    description: Description,
    media: Sequence[MediaObject],
    created_at: datetime | None = None,
) -> ModelVersion:
    """Content edit: snapshot n+1 carrying the latest version's status.

    Raises FORBIDDEN_STATE when the latest version is APPROVED or REJECTED
    (an approved model must be reopened first; a rejected one is terminal).
    """
    prev = history.latest
    if prev.status in (Status.APPROVED, Status.REJECTED):
        raise ForbiddenState("cannot edit a model whose latest version is %s" % prev.status.value)
    stamp = created_at or now_utc()
    if stamp < prev.created_at:
        stamp = prev.created_at
    return ModelVersion(
        key=history.key,
        version=prev.version + 1,
        status=prev.status,
        edited_by=actor,
        schema_version=prev.schema_version,
        description=description,
        media=tuple(media),
        created_at=stamp,
        license=prev.license,
    )


def reopened_version(history: ModelHistory, actor: str, created_at: datetime | None = None) -> ModelVersion:
    """Copy of the latest (approved) version, back in EDIT state as n+1."""
    prev = history.latest
    stamp = created_at or now_utc()
    if stamp < prev.created_at:
        stamp = prev.created_at
    return replace(
        prev,
        version=prev.version + 1,
        status=Status.EDIT,
        edited_by=actor,
        created_at=stamp,
    )
