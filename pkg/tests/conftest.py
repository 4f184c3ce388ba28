"""Shared fixtures: a temporary store, a standard cast of users, and
builders for valid model content."""

from __future__ import annotations

import pytest

from gallery.auth import GlobalRole, User, hash_password
from gallery.core import (
    AuthorRef,
    Description,
    FileRef,
    MediaObject,
    ModelHistory,
    ModelVersion,
    Status,
    now_utc,
)
from gallery.storage import Store
from gallery.workflow import GalleryService

PASSWORD = "correct horse battery staple"

# One precomputed hash shared by all test users; hashing is deliberately slow.
_HASH = hash_password(PASSWORD)

CAST = (
    ("admin", GlobalRole.ADMIN),
    ("owner", GlobalRole.AUTHOR),
    ("editor", GlobalRole.AUTHOR),
    ("reviewer", GlobalRole.REVIEWER),
    ("revowner", GlobalRole.REVIEWER),
    ("author", GlobalRole.AUTHOR),
)


def make_user(name: str, role: GlobalRole) -> User:
    return User(name, name.capitalize(), "%s@example.org" % name, role, _HASH)


@pytest.fixture
def store(tmp_path):
    return Store.initialize(tmp_path / "store")


@pytest.fixture
def users(store):
    out = {}
    for name, role in CAST:
        user = make_user(name, role)
        store.add_user(user)
        out[name] = user
    return out


@pytest.fixture
def service(store, users):
    return GalleryService(store)


def make_description(title: str = "A Surface", text: str = "", authors=("Owner",), references=()) -> Description:
    return Description(
        title=title,
        authors=tuple(AuthorRef(name=n, position=i) for i, n in enumerate(authors)),
        text=text,
        keywords=frozenset(),
        references=tuple(references),
    )


def make_version(
    key: str = "a_surface",
    version: int = 1,
    status: Status = Status.EDIT,
    edited_by: str = "owner",
    schema_version: int = 2,
    description: Description | None = None,
    media: tuple[MediaObject, ...] = (),
    license: str | None = "CC BY-SA 4.0",
) -> ModelVersion:
    return ModelVersion(
        key=key,
        version=version,
        status=status,
        edited_by=edited_by,
        schema_version=schema_version,
        description=description or make_description(),
        media=media,
        created_at=now_utc(),
        license=license if schema_version >= 2 else None,
    )


def make_history(
    key: str = "a_surface",
    status: Status = Status.EDIT,
    owners=("owner",),
    editors=("editor",),
    **kwargs,
) -> ModelHistory:
    v = make_version(key=key, status=status, **kwargs)
    return ModelHistory(key=key, versions=(v,), owners=frozenset(owners), editors=frozenset(editors))


def make_media(blob_id: str, media_id: str = "m1", preview: str | None = None) -> MediaObject:
    return MediaObject(
        media_id=media_id,
        title="View",
        text="",
        files=(FileRef(blob_id=blob_id, filename="mesh.obj", media_type="model/obj", size_bytes=8),),
        preview=preview,
    )
