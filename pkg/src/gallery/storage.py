"""File-backed persistence: versioned documents plus content-addressed blobs.

Layout under one root directory::

    meta.xml                    store-wide schema version
    users.xml                   accounts with salted password hashes
    audit.log                   append-only status-transition records
    notifications.log           append-only inbox records and read marks
    models/<key>/v<N>.xml       one canonical document per version
    models/<key>/acl.xml        owners and editors of the model
    blobs/<hh>/<sha256-hex>     data files, fanned out by the first 2 hex chars

Documents are written atomically (temp file + rename) and an in-memory index
of all histories is rebuilt at startup.  Mutations on one model key are
serialized by a per-key lock under a shared store lock; garbage collection
and migration take the store lock exclusively.
"""

from __future__ import annotations

import hashlib
import os
import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Iterator
from xml.etree import ElementTree as ET

from . import xmlio
from .auth import GlobalRole, User
from .core import (
    BLOB_ID_RE,
    CURRENT_SCHEMA,
    USERNAME_RE,
    ModelHistory,
    ModelVersion,
    Status,
    validate_version,
)
from .errors import (
    BadRequest,
    CorruptBlob,
    DuplicateKey,
    IllegalState,
    IoFailure,
    NotFound,
    SchemaMismatch,
    UnknownUser,
    ValidationFailed,
)
from .events import (
    AuditEvent,
    Notification,
    decode_audit_line,
    decode_notification_line,
    encode_audit_line,
    encode_notification_line,
    encode_read_mark,
)

BLOB_FANOUT = 2


class _RWLock:
    """Small reader-writer lock: many shared holders or one exclusive."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    @contextmanager
    def shared(self) -> Iterator[None]:
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def exclusive(self) -> Iterator[None]:
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class Store:
    """One gallery store rooted at a directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        if not (self.root / "meta.xml").is_file():
            raise NotFound("no store at %s (missing meta.xml)" % self.root)
        self._lock = _RWLock()
        self._key_locks: dict[str, threading.Lock] = {}
        self._key_locks_guard = threading.Lock()
        # set while a migration swaps directories; the API answers 503 then
        self.migrating = threading.Event()
        # test hook: called between temp write and rename (crash injection)
        self._before_replace: Callable[[Path], None] | None = None
        self.reload()

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def initialize(cls, root: str | Path, schema_version: int = CURRENT_SCHEMA) -> "Store":
        root = Path(root)
        if (root / "meta.xml").exists():
            raise IoFailure("store at %s already initialized" % root)
        (root / "models").mkdir(parents=True, exist_ok=True)
        (root / "blobs").mkdir(parents=True, exist_ok=True)
        meta = ET.Element("store")
        meta.set("schema", str(schema_version))
        _write_atomic(root / "meta.xml", xmlio.write_canonical(meta).encode("utf-8"))
        _write_atomic(root / "users.xml", xmlio.write_canonical(ET.Element("users")).encode("utf-8"))
        (root / "audit.log").touch()
        (root / "notifications.log").touch()
        return cls(root)

    @classmethod
    def open_or_initialize(cls, root: str | Path) -> "Store":
        root = Path(root)
        if (root / "meta.xml").is_file():
            return cls(root)
        return cls.initialize(root)

    def reload(self) -> None:
        """Rebuild the in-memory index from disk (startup and post-migration)."""
        self.schema_version = self._read_meta()
        self._users = self._read_users()
        self._histories = {}
        models_dir = self.root / "models"
        if models_dir.is_dir():
            for key_dir in sorted(models_dir.iterdir()):
                if key_dir.is_dir():
                    self._histories[key_dir.name] = self._read_history(key_dir)
        self._notifications, self._next_notification_id = self._read_notifications()

    # -- locks --------------------------------------------------------------

    def _key_lock(self, key: str) -> threading.Lock:
        with self._key_locks_guard:
            return self._key_locks.setdefault(key, threading.Lock())

    @contextmanager
    def locked_key(self, key: str) -> Iterator[None]:
        """Shared store access plus exclusive access to one model key."""
        with self._lock.shared():
            with self._key_lock(key):
                yield

    @contextmanager
    def exclusive(self) -> Iterator[None]:
        """Whole-store exclusive access (garbage collection, migration)."""
        with self._lock.exclusive():
            yield

    # -- meta ---------------------------------------------------------------

    def _read_meta(self) -> int:
        try:
            tree = xmlio.parse_tree((self.root / "meta.xml").read_bytes())
        except (OSError, ValueError) as exc:
            raise IoFailure("unreadable meta.xml: %s" % exc) from exc
        if tree.tag != "store" or "schema" not in tree.attrib:
            raise IoFailure("meta.xml is not a store descriptor")
        return int(tree.get("schema", "0"))

    def set_schema_version(self, value: int) -> None:
        meta = ET.Element("store")
        meta.set("schema", str(value))
        _write_atomic(self.root / "meta.xml", xmlio.write_canonical(meta).encode("utf-8"))
        self.schema_version = value

    # -- users --------------------------------------------------------------

    def _read_users(self) -> dict[str, User]:
        path = self.root / "users.xml"
        try:
            tree = xmlio.parse_tree(path.read_bytes())
        except (OSError, ValueError) as exc:
            raise IoFailure("unreadable users.xml: %s" % exc) from exc
        users: dict[str, User] = {}
        for ue in tree:
            hash_elem = ue.find("password-hash")
            users[ue.get("username", "")] = User(
                username=ue.get("username", ""),
                display_name=ue.get("display-name", ""),
                email=ue.get("email", ""),
                global_role=GlobalRole(ue.get("role", "author")),
                password_hash=(hash_elem.text or "") if hash_elem is not None else "",
            )
        return users

    def _write_users(self) -> None:
        rootelem = ET.Element("users")
        for name in sorted(self._users):
            u = self._users[name]
            ue = ET.SubElement(rootelem, "user")
            ue.set("username", u.username)
            ue.set("display-name", u.display_name)
            ue.set("email", u.email)
            ue.set("role", u.global_role.value)
            ET.SubElement(ue, "password-hash").text = u.password_hash
        _write_atomic(self.root / "users.xml", xmlio.write_canonical(rootelem).encode("utf-8"))

    def add_user(self, user: User) -> None:
        if not USERNAME_RE.match(user.username):
            raise BadRequest("username %r does not match the username pattern" % user.username)
        if "@" not in user.email:
            raise BadRequest("email %r is not an address" % user.email)
        if not user.password_hash:
            raise BadRequest("user %r has no password hash" % user.username)
        with self._lock.shared():
            if user.username in self._users:
                raise DuplicateKey("user %r already exists" % user.username)
            self._users[user.username] = user
            self._write_users()

    def update_user(self, user: User) -> None:
        with self._lock.shared():
            if user.username not in self._users:
                raise UnknownUser("no such user %r" % user.username)
            self._users[user.username] = user
            self._write_users()

    def get_user(self, username: str) -> User | None:
        return self._users.get(username)

    def list_users(self) -> list[User]:
        return [self._users[n] for n in sorted(self._users)]

    def users_by_role(self, role: GlobalRole) -> list[User]:
        return [u for u in self.list_users() if u.global_role is role]

    # -- histories ----------------------------------------------------------

    def _read_history(self, key_dir: Path) -> ModelHistory:
        key = key_dir.name
        versions: list[ModelVersion] = []
        numbers = []
        for path in key_dir.glob("v*.xml"):
            try:
                numbers.append(int(path.stem[1:]))
            except ValueError:
                raise IoFailure("unexpected document file %s" % path) from None
        for n in sorted(numbers):
            path = key_dir / ("v%d.xml" % n)
            try:
                v = xmlio.parse_version(path.read_bytes())
            except (OSError, ValueError) as exc:
                raise IoFailure("unreadable document %s: %s" % (path, exc)) from exc
            if v.key != key or v.version != n:
                raise IoFailure("document %s does not match its location" % path)
            versions.append(v)
        if not versions:
            raise IoFailure("model directory %s has no versions" % key_dir)
        if [v.version for v in versions] != list(range(1, len(versions) + 1)):
            raise IoFailure("version numbers of %s are not contiguous" % key)
        owners, editors = self._read_acl(key_dir / "acl.xml")
        return ModelHistory(key=key, versions=tuple(versions), owners=owners, editors=editors)

    def _read_acl(self, path: Path) -> tuple[frozenset[str], frozenset[str]]:
        try:
            tree = xmlio.parse_tree(path.read_bytes())
        except (OSError, ValueError) as exc:
            raise IoFailure("unreadable acl %s: %s" % (path, exc)) from exc
        owners = frozenset(e.text or "" for e in tree.findall("owner"))
        editors = frozenset(e.text or "" for e in tree.findall("editor"))
        return owners, editors

    def _write_acl(self, history: ModelHistory) -> None:
        acl = ET.Element("acl")
        for name in sorted(history.owners):
            ET.SubElement(acl, "owner").text = name
        for name in sorted(history.editors):
            ET.SubElement(acl, "editor").text = name
        _write_atomic(
            self.root / "models" / history.key / "acl.xml",
            xmlio.write_canonical(acl).encode("utf-8"),
        )

    def list_keys(self) -> list[str]:
        return sorted(self._histories)

    def load_history(self, key: str) -> ModelHistory:
        history = self._histories.get(key)
        if history is None:
            raise NotFound("no model %r" % key)
        return history

    def has_key(self, key: str) -> bool:
        return key in self._histories

    def create_history(self, history: ModelHistory) -> None:
        """Persist a fresh single-version history (new model)."""
        if len(history.versions) != 1:
            raise IoFailure("new histories must have exactly one version")
        with self.locked_key(history.key):
            if history.key in self._histories:
                raise DuplicateKey("model %r already exists" % history.key)
            self._check_version(history.latest)
            key_dir = self.root / "models" / history.key
            key_dir.mkdir(parents=True, exist_ok=True)
            self._write_version_file(history.latest)
            self._write_acl(history)
            self._histories[history.key] = history

    def save_version(self, v: ModelVersion) -> ModelHistory:
        """Append version n+1 or rewrite the latest version in place.

        Rewrites are for status transitions only; an APPROVED or REJECTED
        version is immutable and never rewritten.
        """
        with self.locked_key(v.key):
            history = self._histories.get(v.key)
            if history is None:
                raise NotFound("no model %r" % v.key)
            self._check_version(v)
            n = len(history.versions)
            if v.version == n + 1:
                new_versions = history.versions + (v,)
            elif v.version == n:
                old = history.versions[-1]
                if old.status in (Status.APPROVED, Status.REJECTED):
                    raise IllegalState("version %s/v%d is immutable" % (v.key, v.version))
                new_versions = history.versions[:-1] + (v,)
            else:
                raise IllegalState(
                    "can only write version %d or %d of %s, not %d" % (n, n + 1, v.key, v.version)
                )
            self._write_version_file(v)
            updated = ModelHistory(
                key=history.key, versions=new_versions, owners=history.owners, editors=history.editors
            )
            self._histories[v.key] = updated
            return updated

    def save_acl(self, history: ModelHistory) -> None:
        """Persist changed owner/editor sets for an existing model."""
        with self.locked_key(history.key):
            current = self._histories.get(history.key)
            if current is None:
                raise NotFound("no model %r" % history.key)
            updated = ModelHistory(
                key=history.key, versions=current.versions, owners=history.owners, editors=history.editors
            )
            self._write_acl(updated)
            self._histories[history.key] = updated

    def delete_history(self, key: str) -> ModelHistory:
        """Remove every version and the ACL of a model from the store."""
        with self.locked_key(key):
            history = self._histories.get(key)
            if history is None:
                raise NotFound("no model %r" % key)
            key_dir = self.root / "models" / key
            try:
                for path in sorted(key_dir.iterdir()):
                    path.unlink()
                key_dir.rmdir()
            except OSError as exc:
                raise IoFailure("could not delete %s: %s" % (key_dir, exc)) from exc
            del self._histories[key]
            return history

    def _check_version(self, v: ModelVersion) -> None:
        if v.schema_version != self.schema_version:
            raise SchemaMismatch(
                "document schema %d, store schema %d" % (v.schema_version, self.schema_version)
            )
        report = validate_version(v, blob_exists=self.blob_exists)
        if not report.ok:
            raise ValidationFailed(
                "; ".join("%s at %s" % (viol.code, viol.path) for viol in report.violations),
                report=report,
            )

    def _write_version_file(self, v: ModelVersion) -> None:
        path = self.root / "models" / v.key / ("v%d.xml" % v.version)
        _write_atomic(path, xmlio.serialize_version(v), self._before_replace)

    def version_bytes(self, key: str, version: int) -> bytes:
        path = self.root / "models" / key / ("v%d.xml" % version)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise NotFound("no stored document %s v%d" % (key, version)) from exc

    # -- blobs ----------------------------------------------------------------

    def _blob_path(self, blob_id: str) -> Path:
        return self.root / "blobs" / blob_id[:BLOB_FANOUT] / blob_id

    def put_blob(self, data: bytes) -> str:
        """Store bytes content-addressed; idempotent for identical content."""
        blob_id = hashlib.sha256(data).hexdigest()
        with self._lock.shared():
            path = self._blob_path(blob_id)
            if path.is_file():
                return blob_id
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.parent / (".tmp-" + os.urandom(8).hex())
            try:
                tmp.write_bytes(data)
                if hashlib.sha256(tmp.read_bytes()).hexdigest() != blob_id:
                    tmp.unlink(missing_ok=True)
                    raise IoFailure("blob verification failed after write")
                os.replace(tmp, path)
            except OSError as exc:
                tmp.unlink(missing_ok=True)
                raise IoFailure("could not store blob: %s" % exc) from exc
        return blob_id

    def get_blob(self, blob_id: str) -> bytes:
        if not BLOB_ID_RE.match(blob_id):
            raise NotFound("malformed blob id %r" % blob_id)
        path = self._blob_path(blob_id)
        try:
            data = path.read_bytes()
        except OSError:
            raise NotFound("no blob %s" % blob_id) from None
        if hashlib.sha256(data).hexdigest() != blob_id:
            raise CorruptBlob("blob %s does not match its digest" % blob_id)
        return data

    def blob_exists(self, blob_id: str) -> bool:
        return bool(BLOB_ID_RE.match(blob_id)) and self._blob_path(blob_id).is_file()

    def iter_blob_ids(self) -> Iterator[str]:
        blobs_dir = self.root / "blobs"
        if not blobs_dir.is_dir():
            return
        for sub in sorted(blobs_dir.iterdir()):
            if sub.is_dir():
                for path in sorted(sub.iterdir()):
                    if BLOB_ID_RE.match(path.name):
                        yield path.name

    def referenced_blob_ids(self) -> set[str]:
        """Union of blob references over every version of every model."""
        out: set[str] = set()
        for history in self._histories.values():
            for v in history.versions:
                out.update(v.blob_ids())
        return out

    def collect_garbage(self) -> set[str]:
        """Delete exactly the blobs no version references; returns them."""
        with self.exclusive():
            referenced = self.referenced_blob_ids()
            deleted: set[str] = set()
            failures: list[str] = []
            for blob_id in list(self.iter_blob_ids()):
                if blob_id in referenced:
                    continue
                try:
                    self._blob_path(blob_id).unlink()
                    deleted.add(blob_id)
                except OSError:
                    failures.append(blob_id)
            if failures:
                raise IoFailure(
                    "garbage collection left %d blobs behind (safe to re-run)" % len(failures),
                    deleted=deleted,
                )
            return deleted

    # -- audit ----------------------------------------------------------------

    def append_audit(self, event: AuditEvent) -> None:
        self._append_line(self.root / "audit.log", encode_audit_line(event))

    def read_audit(self, existing_keys_only: bool = True) -> list[AuditEvent]:
        events = []
        for line in self._read_lines(self.root / "audit.log"):
            try:
                events.append(decode_audit_line(line))
            except ValueError as exc:
                raise IoFailure("corrupt audit line: %s" % exc) from exc
        if existing_keys_only:
            events = [e for e in events if e.key in self._histories]
        return events

    # -- notifications ----------------------------------------------------------

    def _read_notifications(self) -> tuple[dict[int, Notification], int]:
        notifications: dict[int, Notification] = {}
        path = self.root / "notifications.log"
        for line in self._read_lines(path):
            try:
                record = decode_notification_line(line)
            except ValueError as exc:
                raise IoFailure("corrupt notification line: %s" % exc) from exc
            if isinstance(record, int):
                if record in notifications:
                    notifications[record] = notifications[record].marked_read()
            else:
                notifications[record.id] = record
        next_id = max(notifications, default=0) + 1
        return notifications, next_id

    def next_notification_id(self) -> int:
        with self._key_locks_guard:
            nid = self._next_notification_id
            self._next_notification_id += 1
            return nid

    def append_notification(self, n: Notification) -> None:
        self._notifications[n.id] = n
        self._append_line(self.root / "notifications.log", encode_notification_line(n))

    def mark_notification_read(self, notification_id: int) -> Notification:
        n = self._notifications.get(notification_id)
        if n is None:
            raise NotFound("no notification %d" % notification_id)
        marked = n.marked_read()
        self._notifications[notification_id] = marked
        self._append_line(self.root / "notifications.log", encode_read_mark(notification_id))
        return marked

    def notifications_for(self, username: str) -> list[Notification]:
        """A user's inbox, newest first (ties broken by descending id)."""
        inbox = [n for n in self._notifications.values() if n.recipient == username]
        return sorted(inbox, key=lambda n: (n.at, n.id), reverse=True)

    def get_notification(self, notification_id: int) -> Notification | None:
        return self._notifications.get(notification_id)

    # -- helpers ----------------------------------------------------------------

    def _append_line(self, path: Path, line: str) -> None:
        try:
            with path.open("a", encoding="utf-8", newline="") as fh:
                fh.write(line + "\n")
        except OSError as exc:
            raise IoFailure("could not append to %s: %s" % (path, exc)) from exc

    def _read_lines(self, path: Path) -> list[str]:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure("unreadable log %s: %s" % (path, exc)) from exc
        return [line for line in text.split("\n") if line]


def _write_atomic(path: Path, data: bytes, before_replace: Callable[[Path], None] | None = None) -> None:
    tmp = path.parent / (".tmp-" + os.urandom(8).hex())
    try:
        tmp.write_bytes(data)
        if before_replace is not None:
            before_replace(tmp)
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise IoFailure("could not write %s: %s" % (path, exc)) from exc
