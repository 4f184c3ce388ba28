"""Schema rule sets, the migration registry, and the fail-safe store
migration pipeline."""

from __future__ import annotations

import hashlib
from pathlib import Path
from xml.etree import ElementTree as ET

import pytest

from gallery.core import Status
from gallery.errors import ChainGap, DuplicateStep, MigrationFailed, NonadjacentStep, UnknownSchema
from gallery.migration import (
    MIGRATION_1_TO_2,
    Migration,
    MigrationRegistry,
    migrate_store,
    validate_document,
)
from gallery.storage import Store
from gallery.xmlio import parse_tree, serialize_version

from conftest import make_history, make_version


def tree_digest(root: Path) -> str:
    """Order-independent digest of every file under a directory."""
    h = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            h.update(str(path.relative_to(root)).encode())
            h.update(b"\0")
            h.update(path.read_bytes())
            h.update(b"\0")
    return h.hexdigest()


def seed_v1_store(tmp_path, count: int = 20) -> Store:
    store = Store.initialize(tmp_path / "store", schema_version=1)
    for i in range(count):
        h = make_history(key="model_%02d" % i, schema_version=1, status=Status.APPROVED)
        store.create_history(h)
    return store


# -- document validation ---------------------------------------------------------


def doc_bytes(**kwargs) -> bytes:
    return serialize_version(make_version(**kwargs))


def test_valid_documents_pass_both_schemas():
    assert validate_document(parse_tree(doc_bytes(schema_version=1)), 1).ok
    assert validate_document(parse_tree(doc_bytes(schema_version=2)), 2).ok


def test_schema1_rejects_license():
    elem = parse_tree(doc_bytes(schema_version=1))
    ET.SubElement(elem, "license").text = "CC BY-SA 4.0"
    report = validate_document(elem, 1)
    assert [v.code for v in report.violations] == ["UNEXPECTED_LICENSE"]


def test_schema2_requires_nonempty_license():
    elem = parse_tree(doc_bytes(schema_version=2))
    elem.remove(elem.find("license"))
    assert "MISSING_LICENSE" in [v.code for v in validate_document(elem, 2).violations]
    elem2 = parse_tree(doc_bytes(schema_version=2))
    elem2.find("license").text = ""
    assert "MISSING_LICENSE" in [v.code for v in validate_document(elem2, 2).violations]


def test_wrong_schema_attribute_detected():
    elem = parse_tree(doc_bytes(schema_version=2))
    assert any(v.code == "WRONG_SCHEMA" for v in validate_document(elem, 1).violations)


def test_structural_errors_reported():
    elem = parse_tree(b'<model key="abc" version="1" status="edit" edited-by="a" schema="1"/>')
    codes = {v.code for v in validate_document(elem, 1).violations}
    assert "MISSING_DESCRIPTION" in codes


def test_bad_root_reported():
    assert validate_document(parse_tree(b"<thing/>"), 1).violations[0].code == "BAD_ROOT"


def test_unknown_schema_raises():
    with pytest.raises(UnknownSchema):
        validate_document(parse_tree(b"<model/>"), 42)


# -- registry ------------------------------------------------------------------------


def test_registry_rejects_nonadjacent():
    reg = MigrationRegistry()
    with pytest.raises(NonadjacentStep):
        reg.register(Migration(1, 3, lambda e: None, "skip"))


def test_registry_rejects_duplicates():
    reg = MigrationRegistry()
    reg.register(Migration(1, 2, lambda e: None, "a"))
    with pytest.raises(DuplicateStep):
        reg.register(Migration(1, 2, lambda e: None, "b"))


def test_chain_assembly_and_gaps():
    reg = MigrationRegistry()
    reg.register(Migration(1, 2, lambda e: None, "a"))
    reg.register(Migration(2, 3, lambda e: None, "b"))
    assert [m.to_schema for m in reg.chain(1, 3)] == [2, 3]
    assert list(reg.chain(2, 2)) == []
    with pytest.raises(ChainGap):
        reg.chain(1, 4)


# -- the shipped 1 -> 2 migration ------------------------------------------------------


def test_shipped_migration_adds_license():
    elem = parse_tree(doc_bytes(schema_version=1))
    MIGRATION_1_TO_2.transform(elem)
    elem.set("schema", "2")
    report = validate_document(elem, 2)
    assert report.ok
    assert elem.find("license").text == "CC BY-SA 4.0"


# -- store migration --------------------------------------------------------------------


def test_successful_migration(tmp_path):
    store = seed_v1_store(tmp_path)
    pre_digest = tree_digest(store.root)
    report = migrate_store(store, 2)
    assert report.ok and not report.dry_run
    assert len(report.outcomes) == 20
    assert store.schema_version == 2
    for key in store.list_keys():
        v = store.load_history(key).latest
        assert v.schema_version == 2 and v.license == "CC BY-SA 4.0"
    # backup holds the untouched pre-migration state
    assert report.backup is not None and report.backup.is_dir()
    assert tree_digest(report.backup) == pre_digest


def test_migration_validates_every_document_at_target(tmp_path):
    store = seed_v1_store(tmp_path, count=5)
    report = migrate_store(store, 2)
    assert all(outcome.ok for outcome in report.outcomes)
    assert {o.key for o in report.outcomes} == set(store.list_keys())


def test_failed_migration_leaves_store_untouched(tmp_path):
    store = seed_v1_store(tmp_path)
    victim = store.root / "models" / "model_07" / "v1.xml"
    victim.write_bytes(victim.read_bytes().replace(b"<title>A Surface</title>", b"<title></title>"))
    pre_digest = tree_digest(store.root)
    with pytest.raises(MigrationFailed) as err:
        migrate_store(store, 2)
    assert tree_digest(store.root) == pre_digest
    report = err.value.context["report"]
    assert [o.key for o in report.failures] == ["model_07"]
    # no work directory or backup left behind
    assert [p.name for p in store.root.parent.iterdir()] == ["store"]
    assert store.schema_version == 1


def test_unparseable_document_fails_migration(tmp_path):
    store = seed_v1_store(tmp_path, count=3)
    (store.root / "models" / "model_01" / "v1.xml").write_bytes(b"not xml at all")
    pre_digest = tree_digest(store.root)
    with pytest.raises(MigrationFailed):
        migrate_store(store, 2)
    assert tree_digest(store.root) == pre_digest


def test_dry_run_touches_nothing(tmp_path):
    store = seed_v1_store(tmp_path, count=5)
    pre_digest = tree_digest(store.root)
    report = migrate_store(store, 2, dry_run=True)
    assert report.ok and report.dry_run and report.backup is None
    assert tree_digest(store.root) == pre_digest
    assert store.schema_version == 1
    assert [p.name for p in store.root.parent.iterdir()] == ["store"]


def test_dry_run_reports_failures_without_writing(tmp_path):
    store = seed_v1_store(tmp_path, count=4)
    victim = store.root / "models" / "model_02" / "v1.xml"
    victim.write_bytes(victim.read_bytes().replace(b"<title>A Surface</title>", b"<title></title>"))
    pre_digest = tree_digest(store.root)
    report = migrate_store(store, 2, dry_run=True)
    assert not report.ok
    assert [o.key for o in report.failures] == ["model_02"]
    assert tree_digest(store.root) == pre_digest


def test_migrate_noop_when_current(tmp_path):
    store = seed_v1_store(tmp_path, count=2)
    migrate_store(store, 2)
    report = migrate_store(store, 2)
    assert report.ok and report.from_schema == report.to_schema == 2
    assert report.outcomes == ()


def test_downgrade_refused(tmp_path):
    store = seed_v1_store(tmp_path, count=2)
    migrate_store(store, 2)
    with pytest.raises(MigrationFailed):
        migrate_store(store, 1)


def test_migration_to_unknown_target(tmp_path):
    store = seed_v1_store(tmp_path, count=2)
    with pytest.raises(ChainGap):
        migrate_store(store, 9)


def test_all_versions_of_a_chain_are_migrated(tmp_path):
    store = Store.initialize(tmp_path / "store", schema_version=1)
    store.create_history(make_history(schema_version=1))
    store.save_version(make_version(version=2, schema_version=1, license=None))
    migrate_store(store, 2)
    h = store.load_history("a_surface")
    assert [v.schema_version for v in h.versions] == [2, 2]
    assert all(v.license == "CC BY-SA 4.0" for v in h.versions)


def test_store_usable_after_migration(tmp_path):
    store = seed_v1_store(tmp_path, count=3)
    migrate_store(store, 2)
    assert not store.migrating.is_set()
    v2 = make_version(key="model_00", version=2, status=Status.APPROVED, schema_version=2)
    store.save_version(v2)
    assert store.load_history("model_00").latest.version == 2
