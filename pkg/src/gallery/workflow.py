"""Editorial workflow over a store: submission, review verdicts, reopening,
deletion, role grants, and the notification fan-out for every transition.

The :class:`GalleryService` is the single mutation facade.  Mutations on one
model key are serialized by a service-level lock, so a check-then-write pair
(status precondition, permission, save) is atomic per key; the error order is
always authentication, then state (ILLEGAL_STATE / FORBIDDEN_STATE), then
permission (FORBIDDEN), then content validation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from typing import Sequence

from . import core
from .auth import (
    Action,
    Authenticator,
    GlobalRole,
    ModelRole,
    SessionManager,
    User,
    grant as grant_role,
    model_role,
    permit,
)
from .core import Description, FileRef, MediaObject, ModelHistory, ModelVersion, Status, now_utc
from .errors import (
    DuplicateKey,
    EmptyReviewText,
    Forbidden,
    ForbiddenState,
    IllegalState,
    NotFound,
    Unauthenticated,
    VersionConflict,
)
from .events import AuditEvent, Notification, NotificationEvent
from .storage import Store


class VerdictKind(str, Enum):
    APPROVE = "approve"
    SEND_BACK = "send_back"
    REJECT = "reject"


_VERDICT_STATUS = {
    VerdictKind.APPROVE: Status.APPROVED,
    VerdictKind.SEND_BACK: Status.EDIT,
    VerdictKind.REJECT: Status.REJECTED,
}

_VERDICT_EVENT = {
    VerdictKind.APPROVE: NotificationEvent.APPROVED,
    VerdictKind.SEND_BACK: NotificationEvent.SENT_BACK,
    VerdictKind.REJECT: NotificationEvent.REJECTED,
}


@dataclass(frozen=True)
class Verdict:
    """A reviewer's decision; the review text is mandatory prose."""

    kind: VerdictKind
    review_text: str

    def __post_init__(self) -> None:
        if not self.review_text.strip():
            raise EmptyReviewText("every verdict needs a nonempty review text")


class GalleryService:
    """All gallery operations, checked against the permission matrix."""

    def __init__(self, store: Store, sessions: SessionManager | None = None) -> None:
        self.store = store
        self.sessions = sessions or SessionManager()
        self.auth = Authenticator(store.get_user, self.sessions)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _key_lock(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    # -- reads ----------------------------------------------------------------

    def resolve_readable(self, user: User | None, history: ModelHistory) -> ModelVersion | None:
        """The version an unqualified GET serves to this viewer.

        Owners, editors and admins see the latest version; reviewers see the
        latest unless it is a private draft; everyone else sees the current
        public (highest approved) version.
        """
        if user is not None:
            role = model_role(user, history)
            if user.global_role is GlobalRole.ADMIN or role is not None:
                return history.latest
            if user.global_role is GlobalRole.REVIEWER and history.latest.status is not Status.EDIT:
                return history.latest
        return core.current_public_version(history)

    def get_model(self, user: User | None, key: str, version: int | None = None) -> ModelVersion:
        """One version of a model, per the viewer's read permission.

        Anonymous callers get NOT_FOUND for anything they may not read, so a
        denied request is indistinguishable from an absent model.
        """
        history = self.store.load_history(key)
        if version is None:
            resolved = self.resolve_readable(user, history)
            if resolved is None:
                if user is None:
                    raise NotFound("no model %r" % key)
                raise Forbidden("no version of %s is readable for %s" % (key, user.username))
            return resolved
        target = history.get_version(version)
        if target is None or not permit(user, history, version, Action.READ):
            if user is None or target is None:
                raise NotFound("no model %r version %d" % (key, version))
            raise Forbidden("%s may not read %s v%d" % (user.username, key, version))
        return target

    def list_models(self, user: User | None) -> list[tuple[ModelHistory, ModelVersion]]:
        """Every model with a version visible to the viewer, sorted by key."""
        out = []
        for key in self.store.list_keys():
            history = self.store.load_history(key)
            resolved = self.resolve_readable(user, history)
            if resolved is not None:
                out.append((history, resolved))
        return out

    def get_history(self, user: User | None, key: str) -> ModelHistory:
        """The full history, for callers that may read its latest version."""
        history = self.store.load_history(key)
        if self.resolve_readable(user, history) is None:
            if user is None:
                raise NotFound("no model %r" % key)
            raise Forbidden("no version of %s is readable for %s" % (key, user.username))
        return history

    # -- creation and editing --------------------------------------------------

    def create_model(self, actor: User | None, title: str) -> ModelHistory:
        """New model in EDIT state; the creator becomes its sole owner."""
        actor = self._require_user(actor)
        # two creates may derive the same key concurrently; re-derive and retry
        for _ in range(3):
            history = core.new_history(
                title,
                actor.username,
                existing_keys=self.store.list_keys(),
                schema_version=self.store.schema_version,
                creator_display=actor.display_name or None,
            )
            try:
                self.store.create_history(history)
                return history
            except DuplicateKey:
                continue
        raise DuplicateKey("could not find a free key for title %r" % title)

    def append_edit(
        self,
        actor: User | None,
        key: str,
        description: Description,
        media: Sequence[MediaObject],
        expect_version: int | None = None,
    ) -> ModelVersion:
        """Content edit: append version n+1 carrying the current status."""
        actor = self._require_user(actor)
        with self._key_lock(key):
            history = self.store.load_history(key)
            latest = history.latest
            if expect_version is not None and expect_version != latest.version:
                raise VersionConflict(
                    "model %s is at version %d, client edited %d" % (key, latest.version, expect_version)
                )
            if latest.status in (Status.APPROVED, Status.REJECTED):
                raise ForbiddenState(
                    "cannot edit %s: latest version is %s" % (key, latest.status.value)
                )
            if not permit(actor, history, latest.version, Action.WRITE):
                raise Forbidden("%s may not write %s" % (actor.username, key))
            v = core.next_version(history, actor.username, description, tuple(media))
            self.store.save_version(v)
            return v

    # -- transitions -------------------------------------------------------------

    def submit(self, actor: User | None, key: str) -> AuditEvent:
        """EDIT -> PENDING; all reviewers are notified."""
        actor = self._require_user(actor)
        with self._key_lock(key):
            history = self.store.load_history(key)
            latest = history.latest
            if latest.status is not Status.EDIT:
                raise IllegalState("cannot submit %s from %s" % (key, latest.status.value))
            if not permit(actor, history, latest.version, Action.SUBMIT):
                raise Forbidden("%s may not submit %s" % (actor.username, key))
            self.store.save_version(replace(latest, status=Status.PENDING))
            recipients = [u.username for u in self.store.users_by_role(GlobalRole.REVIEWER)]
            return self._record(
                key,
                latest.version,
                actor.username,
                Status.EDIT,
                Status.PENDING,
                NotificationEvent.SUBMITTED,
                recipients,
            )

    def review(self, actor: User | None, key: str, verdict: Verdict) -> AuditEvent:
        """PENDING -> APPROVED | EDIT | REJECTED; owners and editors notified."""
        actor = self._require_user(actor)
        with self._key_lock(key):
            history = self.store.load_history(key)
            latest = history.latest
            if latest.status is not Status.PENDING:
                raise IllegalState("cannot review %s in %s" % (key, latest.status.value))
            if not permit(actor, history, latest.version, Action.REVIEW):
                raise Forbidden("%s may not review %s" % (actor.username, key))
            to_status = _VERDICT_STATUS[verdict.kind]
            self.store.save_version(replace(latest, status=to_status))
            recipients = sorted(history.owners | history.editors)
            return self._record(
                key,
                latest.version,
                actor.username,
                Status.PENDING,
                to_status,
                _VERDICT_EVENT[verdict.kind],
                recipients,
                review_text=verdict.review_text,
            )

    def reopen(self, actor: User | None, key: str) -> ModelVersion:
        """APPROVED -> new EDIT version; the approved one stays public."""
        actor = self._require_user(actor)
        with self._key_lock(key):
            history = self.store.load_history(key)
            latest = history.latest
            if latest.status is not Status.APPROVED:
                raise IllegalState("cannot reopen %s in %s" % (key, latest.status.value))
            if not permit(actor, history, latest.version, Action.REOPEN):
                raise Forbidden("%s may not reopen %s" % (actor.username, key))
            v = core.reopened_version(history, actor.username)
            self.store.save_version(v)
            self.store.append_audit(
                AuditEvent(
                    key=key,
                    version=v.version,
                    actor=actor.username,
                    from_status=Status.APPROVED,
                    to_status=Status.EDIT,
                    at=now_utc(),
                )
            )
            return v

    def delete_model(self, actor: User | None, key: str) -> set[str]:
        """Drop every version, then collect the blobs nothing references."""
        actor = self._require_user(actor)
        with self._key_lock(key):
            history = self.store.load_history(key)
            if not permit(actor, history, history.latest.version, Action.DELETE):
                raise Forbidden("%s may not delete %s" % (actor.username, key))
            self.store.delete_history(key)
        return self.store.collect_garbage()

    def grant(self, actor: User | None, key: str, target: str, role: ModelRole) -> ModelHistory:
        """Add or move a user between the owner and editor sets."""
        actor = self._require_user(actor)
        with self._key_lock(key):
            history = self.store.load_history(key)
            updated = grant_role(
                actor, history, target, role, user_exists=lambda name: self.store.get_user(name) is not None
            )
            self.store.save_acl(updated)
            return updated

    def _record(
        self,
        key: str,
        version: int,
        actor: str,
        from_status: Status,
        to_status: Status,
        event: NotificationEvent,
        recipients: Sequence[str],
        review_text: str | None = None,
    ) -> AuditEvent:
        """Append the audit event plus one notification per recipient."""
        at = now_utc()
        audit = AuditEvent(
            key=key,
            version=version,
            actor=actor,
            from_status=from_status,
            to_status=to_status,
            at=at,
            review_text=review_text,
        )
        self.store.append_audit(audit)
        for recipient in recipients:
            self.store.append_notification(
                Notification(
                    id=self.store.next_notification_id(),
                    recipient=recipient,
                    key=key,
                    version=version,
                    event=event,
                    at=at,
                    review_text=review_text,
                )
            )
        return audit

    # -- files --------------------------------------------------------------------

    def upload_blob(self, actor: User | None, key: str, data: bytes) -> str:
        """Store raw bytes for a model the actor may currently write."""
        actor = self._require_user(actor)
        history = self.store.load_history(key)
        if not permit(actor, history, history.latest.version, Action.WRITE):
            raise Forbidden("%s may not upload to %s" % (actor.username, key))
        return self.store.put_blob(data)

    def get_file(self, user: User | None, blob_id: str) -> tuple[bytes, FileRef | None]:
        """Blob bytes, if some version the viewer may read references them.

        Unreferenced or unreadable blobs are NOT_FOUND for everyone; content
        hashes are unguessable, so no existence information leaks.  The
        FileRef naming the blob is returned when one exists (previews are
        referenced by id only and have none).
        """
        for key in self.store.list_keys():
            history = self.store.load_history(key)
            for v in history.versions:
                if blob_id in v.blob_ids() and permit(user, history, v.version, Action.READ):
                    ref = next(
                        (f for m in v.media for f in m.files if f.blob_id == blob_id), None
                    )
                    return self.store.get_blob(blob_id), ref
        raise NotFound("no readable file %s" % blob_id)

    # -- notifications ----------------------------------------------------------------

    def notifications_for(self, actor: User | None) -> list[Notification]:
        actor = self._require_user(actor)
        return self.store.notifications_for(actor.username)

    def mark_read(self, actor: User | None, notification_id: int) -> Notification:
        """Flip one of the actor's own notifications to read."""
        actor = self._require_user(actor)
        n = self.store.get_notification(notification_id)
        if n is None or n.recipient != actor.username:
            raise NotFound("no notification %d" % notification_id)
        return self.store.mark_notification_read(notification_id)

    # -- administration ----------------------------------------------------------------

    def collect_garbage(self, actor: User | None) -> set[str]:
        actor = self._require_user(actor)
        if actor.global_role is not GlobalRole.ADMIN:
            raise Forbidden("garbage collection is admin-only")
        return self.store.collect_garbage()

    def read_audit(self, actor: User | None) -> list[AuditEvent]:
        actor = self._require_user(actor)
        if actor.global_role is not GlobalRole.ADMIN:
            raise Forbidden("the audit log is admin-only")
        return self.store.read_audit()

    @staticmethod
    def _require_user(actor: User | None) -> User:
        if actor is None:
            raise Unauthenticated("this operation requires credentials")
        return actor
