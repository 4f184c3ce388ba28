"""Model value types: key derivation, version chains, validation, and
public-version resolution."""

from __future__ import annotations

import re
from dataclasses import replace
from datetime import timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gallery.core import (
    KEY_RE,
    AuthorRef,
    Description,
    FileRef,
    MediaObject,
    ModelHistory,
    Reference,
    Status,
    current_public_version,
    derive_key,
    new_history,
    next_version,
    now_utc,
    reopened_version,
    unique_key,
    validate_version,
)
from gallery.errors import DuplicateKey, ForbiddenState, InvalidTitle

from conftest import make_description, make_history, make_media, make_version

BLOB = "0" * 64


# -- key derivation ---------------------------------------------------------


def test_derive_key_examples():
    # [DERIVED] hand-applied slug rule
    assert derive_key("Koebe Polyhedra") == "koebe_polyhedra"
    assert derive_key("Tropical Grassmannian TropGr(2,6)") == "tropical_grassmannian_tropgr_2_6"
    assert derive_key("  --Hello,   World!--  ") == "hello_world"
    assert derive_key("ä") == "000"
    assert derive_key("ab") == "ab0"
    assert derive_key("x" * 100) == "x" * 64


def test_unique_key_suffixes():
    assert unique_key("A Model", set()) == "a_model"
    assert unique_key("A Model", {"a_model"}) == "a_model_2"
    assert unique_key("A Model", {"a_model", "a_model_2"}) == "a_model_3"


def test_unique_key_exhaustion():
    taken = {"a_model"} | {"a_model_%d" % n for n in range(2, 100)}
    with pytest.raises(DuplicateKey):
        unique_key("A Model", taken)


def test_unique_key_respects_length_bound_under_suffix():
    base = "x" * 64
    key = unique_key("x" * 100, {base})
    assert key == "x" * 62 + "_2"
    assert KEY_RE.match(key)


@given(st.text(max_size=80))
def test_derive_key_always_legal(title):
    assert KEY_RE.match(derive_key(title))


# -- history construction ----------------------------------------------------


def test_new_history_shape():
    h = new_history("A Surface", "ada", set(), 2, creator_display="Ada L.")
    assert h.key == "a_surface"
    assert h.owners == frozenset({"ada"})
    assert h.editors == frozenset()
    v = h.latest
    assert (v.version, v.status, v.edited_by) == (1, Status.EDIT, "ada")
    assert v.description.authors == (AuthorRef(name="Ada L.", position=0),)
    assert v.license == "CC BY-SA 4.0"
    assert validate_version(v, blob_exists=lambda b: False).ok


def test_new_history_schema1_has_no_license():
    h = new_history("A Surface", "ada", set(), 1)
    assert h.latest.license is None


def test_new_history_rejects_empty_title():
    with pytest.raises(InvalidTitle):
        new_history("", "ada", set(), 2)


def test_new_history_rejects_taken_explicit_key():
    with pytest.raises(DuplicateKey):
        new_history("A Surface", "ada", {"sc-catenoid"}, 2, key="sc-catenoid")


def test_next_version_appends_and_carries_status():
    h = make_history(status=Status.PENDING)
    v2 = next_version(h, "editor", make_description(title="B"), ())
    assert (v2.version, v2.status, v2.edited_by) == (2, Status.PENDING, "editor")
    assert v2.created_at >= h.latest.created_at


def test_next_version_refuses_terminal_states():
    for status in (Status.APPROVED, Status.REJECTED):
        with pytest.raises(ForbiddenState):
            next_version(make_history(status=status), "owner", make_description(), ())


def test_next_version_clamps_clock_regression():
    h = make_history()
    past = h.latest.created_at - timedelta(hours=1)
    v2 = next_version(h, "owner", make_description(), (), created_at=past)
    assert v2.created_at == h.latest.created_at


def test_reopened_version_is_edit_copy():
    h = make_history(status=Status.APPROVED)
    v2 = reopened_version(h, "owner")
    assert (v2.version, v2.status, v2.edited_by) == (2, Status.EDIT, "owner")
    assert v2.description == h.latest.description
    assert v2.media == h.latest.media
    assert v2.license == h.latest.license


# -- public version resolution ------------------------------------------------


def _chain(*statuses: Status) -> ModelHistory:
    versions = tuple(make_version(version=i + 1, status=s) for i, s in enumerate(statuses))
    return ModelHistory(key="a_surface", versions=versions, owners=frozenset({"owner"}))


def test_current_public_version():
    assert current_public_version(_chain(Status.APPROVED, Status.EDIT)).version == 1
    assert current_public_version(_chain(Status.EDIT)) is None
    assert current_public_version(_chain(Status.APPROVED, Status.APPROVED)).version == 2
    assert current_public_version(_chain(Status.REJECTED)) is None


# -- validation ----------------------------------------------------------------


def ok(v, blobs=frozenset()):
    return validate_version(v, blob_exists=lambda b: b in blobs)


def codes(v, blobs=frozenset()):
    return [viol.code for viol in ok(v, blobs).violations]


def test_valid_version_reports_clean():
    report = ok(make_version())
    assert report.ok and report.violations == ()


def test_dangling_cite():
    v = make_version(description=make_description(text="see \\cite{missing}"))
    assert codes(v) == ["DANGLING_CITE"]


def test_cite_resolved_by_reference():
    r = Reference(ref_key="S97", entry_type="article")
    v = make_version(description=make_description(text="see \\cite{S97}", references=(r,)))
    assert ok(v).ok


def test_dangling_media():
    v = make_version(description=make_description(text="\\media{ghost}"))
    assert codes(v) == ["DANGLING_MEDIA"]


def test_media_text_commands_are_not_cross_checked():
    # the dangling-cite rule binds the description text; media captions are free text
    media = replace(make_media(BLOB), text="\\cite{nope}")
    v = make_version(media=(media,))
    assert ok(v, {BLOB}).ok


def test_empty_media_files():
    media = MediaObject(media_id="m1", title="V", text="", files=())
    v = make_version(media=(media,))
    assert "EMPTY_MEDIA_FILES" in codes(v)


def test_dangling_blob():
    v = make_version(media=(make_media(BLOB),))
    assert codes(v) == ["DANGLING_BLOB"]
    assert ok(v, {BLOB}).ok


def test_empty_authors():
    v = make_version(description=replace(make_description(), authors=()))
    assert "EMPTY_AUTHORS" in codes(v)


def test_author_positions_must_be_0_to_n():
    desc = replace(make_description(), authors=(AuthorRef("A", 0), AuthorRef("B", 2)))
    v = make_version(description=desc)
    assert "BAD_AUTHOR_POSITIONS" in codes(v)


def test_bad_key_charset():
    v = make_version(key="Bad Key!")
    assert "BAD_KEY" in codes(v)


def test_duplicate_media_id():
    media = (make_media(BLOB, media_id="m1"), make_media(BLOB, media_id="m1"))
    v = make_version(media=media)
    assert "DUPLICATE_MEDIA_ID" in codes(v, {BLOB})


def test_missing_license_on_schema2():
    v = make_version(license=None)
    assert codes(v) == ["MISSING_LICENSE"]


def test_unexpected_license_on_schema1():
    v = replace(make_version(schema_version=1), license="CC BY-SA 4.0")
    assert codes(v) == ["UNEXPECTED_LICENSE"]


def test_illegal_xml_chars_reported():
    v = make_version(description=make_description(text="a\x00b"))
    assert "ILLEGAL_XML_CHAR" in codes(v)


def test_validation_is_idempotent_and_sorted():
    desc = replace(make_description(text="\\cite{x} \\media{y}"), authors=())
    v = make_version(description=desc)
    first = ok(v)
    second = ok(v)
    assert first == second
    paths = [viol.path for viol in first.violations]
    assert paths == sorted(paths)
    assert not first.ok


def test_version_number_must_be_positive():
    v = make_version(version=0)
    assert "BAD_VERSION" in codes(v)
