"""Service configuration: a flat key=value text file.

Recognized keys: ``data_dir``, ``listen_addr``, ``max_upload_bytes``,
``session_ttl_hours``.  Blank lines and ``#`` comments are ignored; unknown
keys are rejected so typos do not silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import BadRequest

DEFAULT_MAX_UPLOAD_BYTES = 512 * 1024 * 1024
DEFAULT_LISTEN_ADDR = "127.0.0.1:8080"
DEFAULT_SESSION_TTL_HOURS = 24


@dataclass(frozen=True)
class Config:
    data_dir: Path
    listen_addr: str = DEFAULT_LISTEN_ADDR
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES
    session_ttl_hours: int = DEFAULT_SESSION_TTL_HOURS

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])


def parse_config(text: str, base_dir: Path | None = None) -> Config:
    """Parse config text; relative data_dir resolves against base_dir."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BadRequest("config line %d is not key=value: %r" % (lineno, raw))
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in {"data_dir", "listen_addr", "max_upload_bytes", "session_ttl_hours"}:
            raise BadRequest("unknown config key %r on line %d" % (key, lineno))
        if key in values:
            raise BadRequest("duplicate config key %r on line %d" % (key, lineno))
        values[key] = value.strip()

    if "data_dir" not in values:
        raise BadRequest("config must set data_dir")
    data_dir = Path(values["data_dir"])
    if base_dir is not None and not data_dir.is_absolute():
        data_dir = base_dir / data_dir

    try:
        max_upload = int(values.get("max_upload_bytes", DEFAULT_MAX_UPLOAD_BYTES))
        ttl_hours = int(values.get("session_ttl_hours", DEFAULT_SESSION_TTL_HOURS))
    except ValueError as exc:
        raise BadRequest("config numbers must be integers: %s" % exc) from exc
    if max_upload < 1 or ttl_hours < 1:
        raise BadRequest("max_upload_bytes and session_ttl_hours must be positive")

    listen_addr = values.get("listen_addr", DEFAULT_LISTEN_ADDR)
    if ":" not in listen_addr:
        raise BadRequest("listen_addr must be host:port")

    return Config(
        data_dir=data_dir,
        listen_addr=listen_addr,
        max_upload_bytes=max_upload,
        session_ttl_hours=ttl_hours,
    )


def load_config(path: str | Path) -> Config:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
