"""Users, credentials, sessions, and the permission matrix.

The matrix combines the caller's global role, their per-model role, and the
target version's status into a yes/no answer for each action.  It is total:
``permit`` never raises.

Actor classes and what they may do (columns are the target version status)::

    action  | admin      | owner         | editor    | reviewer      | author | anonymous
    --------+------------+---------------+-----------+---------------+--------+----------
    READ    | all        | all           | all       | pend/appr/rej | appr   | appr
    WRITE   | all        | edit          | edit      | pending       | -      | -
    SUBMIT  | edit       | edit          | -         | -             | -      | -
    REVIEW  | pending    | -             | -         | pending       | -      | -
    GRANT   | any        | any           | -         | -             | -      | -
    DELETE  | any        | no appr. ver. | -         | -             | -      | -
    REOPEN  | approved   | approved      | -         | -             | -      | -

"reviewer"/"author" here mean users with no model role on the target; a
reviewer who is owner or editor of a model acts purely as owner/editor for
it, so nobody can review their own model.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import os
import re
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

from .core import USERNAME_RE, ModelHistory, Status, now_utc
from .errors import (
    BadCredentials,
    Forbidden,
    LastOwner,
    MalformedHash,
    Unauthenticated,
    UnknownUser,
    WeakPassword,
)

MIN_PASSWORD_LEN = 8
SESSION_TTL = timedelta(hours=24)
SESSION_TOKEN_BYTES = 32  # 256 bits

# scrypt parameters; ln is log2 of the CPU/memory cost
DEFAULT_COST_LN = 14
SCRYPT_R = 8
SCRYPT_P = 1
_SALT_BYTES = 16
_HASH_RE = re.compile(r"^\$scrypt\$ln=(\d{1,2}),r=(\d{1,3}),p=(\d{1,3})\$([A-Za-z0-9_-]+)\$([A-Za-z0-9_-]+)$")


class GlobalRole(str, Enum):
    ADMIN = "admin"
    REVIEWER = "reviewer"
    AUTHOR = "author"


class ModelRole(str, Enum):
    OWNER = "owner"
    EDITOR = "editor"


class Action(str, Enum):
    READ = "read"
    WRITE = "write"
    SUBMIT = "submit"
    REVIEW = "review"
    GRANT = "grant"
    DELETE = "delete"
    REOPEN = "reopen"


@dataclass(frozen=True)
class User:
    username: str
    display_name: str
    email: str
    global_role: GlobalRole
    password_hash: str


@dataclass(frozen=True)
class Session:
    token: str
    username: str
    created_at: datetime
    expires_at: datetime


def valid_username(name: str) -> bool:
    return bool(USERNAME_RE.match(name))


# ---------------------------------------------------------------------------
# Password hashing
# ---------------------------------------------------------------------------


def hash_password(password: str, cost_ln: int = DEFAULT_COST_LN) -> str:
    """Salted, cost-parameterized hash with a fresh random salt per call.

    The PHC-style result string carries its own parameters, so stored hashes
    survive cost changes.
    """
    if len(password) < MIN_PASSWORD_LEN:
        raise WeakPassword("passwords must be at least %d characters" % MIN_PASSWORD_LEN)
    salt = os.urandom(_SALT_BYTES)
    digest = _scrypt(password, salt, cost_ln, SCRYPT_R, SCRYPT_P)
    return "$scrypt$ln=%d,r=%d,p=%d$%s$%s" % (
        cost_ln,
        SCRYPT_R,
        SCRYPT_P,
        _b64(salt),
        _b64(digest),
    )


def verify_password(password: str, stored: str) -> bool:
    """Constant-time check of a password against a stored hash string."""
    m = _HASH_RE.match(stored)
    if not m:
        raise MalformedHash("not a recognized password hash")
    cost_ln, r, p = int(m.group(1)), int(m.group(2)), int(m.group(3))
    try:
        salt = _unb64(m.group(4))
        expected = _unb64(m.group(5))
    except ValueError as exc:
        raise MalformedHash("undecodable salt or digest") from exc
    if not (1 <= cost_ln <= 24) or not (1 <= r <= 64) or not (1 <= p <= 16):
        raise MalformedHash("hash parameters out of range")
    actual = _scrypt(password, salt, cost_ln, r, p)
    return hmac.compare_digest(actual, expected)


def _scrypt(password: str, salt: bytes, cost_ln: int, r: int, p: int) -> bytes:
    return hashlib.scrypt(
        password.encode("utf-8"),
        salt=salt,
        n=1 << cost_ln,
        r=r,
        p=p,
        maxmem=256 * 1024 * 1024,
        dklen=32,
    )


def _b64(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).decode("ascii").rstrip("=")


def _unb64(text: str) -> bytes:
    pad = "=" * (-len(text) % 4)
    try:
        return base64.urlsafe_b64decode(text + pad)
    except Exception as exc:  # binascii.Error is undocumented across versions
        raise ValueError("bad base64") from exc


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------


class SessionManager:
    """In-memory session table.  All operations are linearizable: once a
    token is logged out or expired, it never authenticates again."""

    def __init__(self, ttl: timedelta = SESSION_TTL) -> None:
        self.ttl = ttl
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def create(self, username: str, at: datetime | None = None) -> Session:
        at = at or now_utc()
        session = Session(
            token=secrets.token_urlsafe(SESSION_TOKEN_BYTES),
            username=username,
            created_at=at,
            expires_at=at + self.ttl,
        )
        with self._lock:
            self._sessions[session.token] = session
        return session

    def resolve(self, token: str, at: datetime | None = None) -> Session | None:
        """The live session for a token; expired sessions are purged."""
        at = at or now_utc()
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if session.expires_at <= at:
                del self._sessions[token]
                return None
            return session

    def revoke(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)

    def revoke_user(self, username: str) -> None:
        with self._lock:
            for token in [t for t, s in self._sessions.items() if s.username == username]:
                del self._sessions[token]


# ---------------------------------------------------------------------------
# Authentication
# ---------------------------------------------------------------------------


class Authenticator:
    """Resolves credentials (username/password or session token) to a User."""

    def __init__(self, get_user, sessions: SessionManager) -> None:
        self._get_user = get_user
        self.sessions = sessions

    def login(self, username: str, password: str) -> Session:
        """Password login; one error for unknown user and wrong password."""
        user = self._get_user(username)
        if user is None:
            # burn comparable time so unknown users are not distinguishable
            try:
                verify_password(password, hash_password("x" * MIN_PASSWORD_LEN))
            except MalformedHash:
                pass
            raise BadCredentials("bad username or password")
        try:
            ok = verify_password(password, user.password_hash)
        except MalformedHash:
            ok = False
        if not ok:
            raise BadCredentials("bad username or password")
        return self.sessions.create(username)

    def logout(self, token: str) -> None:
        self.sessions.revoke(token)

    def by_password(self, username: str, password: str) -> User:
        user = self._get_user(username)
        if user is None:
            raise Unauthenticated("bad credentials")
        try:
            ok = verify_password(password, user.password_hash)
        except MalformedHash:
            ok = False
        if not ok:
            raise Unauthenticated("bad credentials")
        return user

    def by_token(self, token: str) -> User:
        session = self.sessions.resolve(token)
        if session is None:
            raise Unauthenticated("missing or expired session")
        user = self._get_user(session.username)
        if user is None:
            raise Unauthenticated("session user no longer exists")
        return user


# ---------------------------------------------------------------------------
# Permission matrix
# ---------------------------------------------------------------------------


def model_role(user: User | None, history: ModelHistory) -> ModelRole | None:
    if user is None:
        return None
    if user.username in history.owners:
        return ModelRole.OWNER
    if user.username in history.editors:
        return ModelRole.EDITOR
    return None


def permit(user: User | None, history: ModelHistory, target_version: int, action: Action) -> bool:
    """Total permission check for one action on one version.

    Unknown versions are never permitted.  The self-review rule comes first:
    holding a model role (owner or editor) disables REVIEW regardless of the
    global role, admins included.
    """
    version = history.get_version(target_version)
    if version is None:
        return False
    status = version.status

    if user is None:
        return action is Action.READ and status is Status.APPROVED

    role = model_role(user, history)

    if action is Action.REVIEW and role is not None:
        return False

    if user.global_role is GlobalRole.ADMIN:
        return _permit_admin(status, action)
    if role is ModelRole.OWNER:
        return _permit_owner(history, status, action)
    if role is ModelRole.EDITOR:
        return _permit_editor(status, action)
    if user.global_role is GlobalRole.REVIEWER:
        return _permit_reviewer(status, action)
    return action is Action.READ and status is Status.APPROVED


def _permit_admin(status: Status, action: Action) -> bool:
    if action in (Action.READ, Action.WRITE, Action.GRANT, Action.DELETE):
        return True
    if action is Action.SUBMIT:
        return status is Status.EDIT
    if action is Action.REVIEW:
        return status is Status.PENDING
    if action is Action.REOPEN:
        return status is Status.APPROVED
    return False


def _permit_owner(history: ModelHistory, status: Status, action: Action) -> bool:
    if action is Action.READ:
        return True
    if action is Action.WRITE:
        return status is Status.EDIT
    if action is Action.SUBMIT:
        return status is Status.EDIT
    if action is Action.GRANT:
        return True
    if action is Action.DELETE:
        return not history.has_approved()
    if action is Action.REOPEN:
        return status is Status.APPROVED
    return False


def _permit_editor(status: Status, action: Action) -> bool:
    if action is Action.READ:
        return True
    if action is Action.WRITE:
        return status is Status.EDIT
    return False


def _permit_reviewer(status: Status, action: Action) -> bool:
    if action is Action.READ:
        return status in (Status.PENDING, Status.APPROVED, Status.REJECTED)
    if action is Action.WRITE:
        return status is Status.PENDING
    if action is Action.REVIEW:
        return status is Status.PENDING
    return False


# ---------------------------------------------------------------------------
# Granting model roles
# ---------------------------------------------------------------------------


def grant(
    actor: User,
    history: ModelHistory,
    target: str,
    role: ModelRole,
    user_exists=None,
) -> ModelHistory:
    """Add ``target`` to the owners or editors of a model.

    A user already holding the other role is moved; the sets stay disjoint.
    Demoting the sole owner is refused so every model keeps an owner.
    """
    if not permit(actor, history, history.latest.version, Action.GRANT):
        raise Forbidden("%s may not grant roles on %s" % (actor.username, history.key))
    if user_exists is not None and not user_exists(target):
        raise UnknownUser("no such user %r" % target)
    owners = set(history.owners)
    editors = set(history.editors)
    if role is ModelRole.OWNER:
        editors.discard(target)
        owners.add(target)
    else:
        if target in owners and len(owners) == 1:
            raise LastOwner("cannot demote the sole owner of %s" % history.key)
        owners.discard(target)
        editors.add(target)
    return ModelHistory(key=history.key, versions=history.versions, owners=frozenset(owners), editors=frozenset(editors))
