"""Audit events and notifications: records of status transitions and the
inbox messages derived from them, with their append-only log encodings.

Log lines are tab-separated; the free-text review field is the final field,
quoted with backslash escapes so it can carry tabs and newlines.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum

from .core import Status
from .xmlio import format_timestamp, parse_timestamp


class NotificationEvent(str, Enum):
    SUBMITTED = "submitted"
    APPROVED = "approved"
    SENT_BACK = "sent_back"
    REJECTED = "rejected"


@dataclass(frozen=True)
class AuditEvent:
    """One status transition of a model's latest version."""

    key: str
    version: int
    actor: str
    from_status: Status
    to_status: Status
    at: datetime
    review_text: str | None = None


@dataclass(frozen=True)
class Notification:
    """Inbox message derived from an audit event."""

    id: int
    recipient: str
    key: str
    version: int
    event: NotificationEvent
    at: datetime
    review_text: str | None = None
    read: bool = False

    def marked_read(self) -> "Notification":
        return replace(self, read=True)


def quote_field(text: str | None) -> str:
    if text is None:
        return '""'
    escaped = (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
        .replace("\r", "\\r")
    )
    return '"%s"' % escaped


def unquote_field(raw: str) -> str | None:
    if len(raw) < 2 or raw[0] != '"' or raw[-1] != '"':
        raise ValueError("field %r is not quoted" % raw)
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            if i + 1 >= len(body):
                raise ValueError("dangling escape in %r" % raw)
            nxt = body[i + 1]
            out.append({"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    text = "".join(out)
    return text if text else None


def encode_audit_line(e: AuditEvent) -> str:
    return "\t".join(
        [
            format_timestamp(e.at),
            e.key,
            str(e.version),
            e.actor,
            e.from_status.value,
            e.to_status.value,
            quote_field(e.review_text),
        ]
    )


def decode_audit_line(line: str) -> AuditEvent:
    parts = line.split("\t", 6)
    if len(parts) != 7:
        raise ValueError("audit line has %d fields, expected 7" % len(parts))
    return AuditEvent(
        at=parse_timestamp(parts[0]),
        key=parts[1],
        version=int(parts[2]),
        actor=parts[3],
        from_status=Status(parts[4]),
        to_status=Status(parts[5]),
        review_text=unquote_field(parts[6]),
    )


def encode_notification_line(n: Notification) -> str:
    return "\t".join(
        [
            "N",
            str(n.id),
            format_timestamp(n.at),
            n.recipient,
            n.key,
            str(n.version),
            n.event.value,
            quote_field(n.review_text),
        ]
    )


def encode_read_mark(notification_id: int) -> str:
    return "R\t%d" % notification_id


def decode_notification_line(line: str) -> Notification | int:
    """A Notification for "N" records, the marked id for "R" records."""
    if line.startswith("R\t"):
        return int(line.split("\t", 1)[1])
    parts = line.split("\t", 7)
    if len(parts) != 8 or parts[0] != "N":
        raise ValueError("bad notification line %r" % line)
    return Notification(
        id=int(parts[1]),
        at=parse_timestamp(parts[2]),
        recipient=parts[3],
        key=parts[4],
        version=int(parts[5]),
        event=NotificationEvent(parts[6]),
        review_text=unquote_field(parts[7]),
    )
