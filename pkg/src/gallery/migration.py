"""Schema validation of stored documents and fail-safe store migration.

Each schema version has a registered rule set; migrations are pure
document-tree transforms from schema N to N+1 forming a single chain.
``migrate_store`` runs validate - transform - validate per document on a
*copy* of the store directory and swaps the copy in only when every document
passed, so any failure leaves the live store byte-identical.  The pre-state
is kept as a backup directory next to the store.

Shipped chain: schema 1 (no license element) -> schema 2 (mandatory
``<license>`` defaulting to CC BY-SA 4.0).
"""

from __future__ import annotations

import os
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Callable
from xml.etree import ElementTree as ET

from . import xmlio
from .core import (
    DEFAULT_LICENSE,
    KEY_RE,
    Status,
    USERNAME_RE,
    ValidationReport,
    Violation,
    validate_version,
)
from .errors import (
    ChainGap,
    DuplicateStep,
    IoFailure,
    MigrationFailed,
    NonadjacentStep,
    UnknownSchema,
)
from .storage import Store


# ---------------------------------------------------------------------------
# Per-schema document validation
# ---------------------------------------------------------------------------


def _base_rules(elem: ET.Element, schema: int) -> list[Violation]:
    """Structural rules shared by all schemas: the canonical model format."""
    out: list[Violation] = []

    def bad(code: str, path: str, message: str) -> None:
        out.append(Violation(code, path, message))

    if elem.tag != "model":
        bad("BAD_ROOT", "/", "document root is %r, expected 'model'" % elem.tag)
        return out
    for attr in ("key", "version", "status", "edited-by", "schema"):
        if attr not in elem.attrib:
            bad("MISSING_ATTR", "/model/@" + attr, "required attribute %r is absent" % attr)
    key = elem.get("key", "")
    if "key" in elem.attrib and not KEY_RE.match(key):
        bad("BAD_KEY", "/model/@key", "key %r does not match the key pattern" % key)
    if "version" in elem.attrib and not _positive_int(elem.get("version", "")):
        bad("BAD_INT", "/model/@version", "version %r is not a positive integer" % elem.get("version"))
    status = elem.get("status", "")
    if "status" in elem.attrib and status not in {s.value for s in Status}:
        bad("BAD_ENUM", "/model/@status", "status %r is not one of the four statuses" % status)
    edited_by = elem.get("edited-by", "")
    if "edited-by" in elem.attrib and not USERNAME_RE.match(edited_by):
        bad("BAD_USERNAME", "/model/@edited-by", "edited-by %r is not a valid username" % edited_by)
    if "schema" in elem.attrib:
        if not _positive_int(elem.get("schema", "")):
            bad("BAD_INT", "/model/@schema", "schema %r is not a positive integer" % elem.get("schema"))
        elif int(elem.get("schema", "0")) != schema:
            bad(
                "WRONG_SCHEMA",
                "/model/@schema",
                "document declares schema %s, validated against %d" % (elem.get("schema"), schema),
            )
    if len(elem.findall("description")) != 1:
        bad("MISSING_DESCRIPTION", "/model/description", "exactly one description is required")
    if len(elem.findall("media-objects")) > 1:
        bad("DUPLICATE_ELEMENT", "/model/media-objects", "at most one media-objects element")
    return out


def _license_required(elem: ET.Element) -> list[Violation]:
    licenses = elem.findall("license")
    if len(licenses) != 1 or not (licenses[0].text or "").strip():
        return [
            Violation(
                "MISSING_LICENSE", "/model/license", "exactly one nonempty license element is required"
            )
        ]
    return []


def _license_forbidden(elem: ET.Element) -> list[Violation]:
    if elem.findall("license"):
        return [Violation("UNEXPECTED_LICENSE", "/model/license", "schema 1 has no license element")]
    return []


def _rules_v1(elem: ET.Element) -> list[Violation]:
    return _base_rules(elem, 1) + _license_forbidden(elem)


def _rules_v2(elem: ET.Element) -> list[Violation]:
    return _base_rules(elem, 2) + _license_required(elem)


_SCHEMA_RULES: dict[int, Callable[[ET.Element], list[Violation]]] = {1: _rules_v1, 2: _rules_v2}


def register_schema(version: int, rules: Callable[[ET.Element], list[Violation]]) -> None:
    """Register the structural rule set for one schema version."""
    _SCHEMA_RULES[version] = rules


def validate_document(elem: ET.Element, schema: int) -> ValidationReport:
    """Validate one parsed document against a schema's rule set.

    When the structural pass is clean the document is also decoded and run
    through the full semantic validation (author positions, dangling cites,
    blob id patterns, ...) so the report covers every invariant.
    """
    rules = _SCHEMA_RULES.get(schema)
    if rules is None:
        raise UnknownSchema("no rule set for schema %d" % schema)
    key = elem.get("key", "") if elem.tag == "model" else ""
    version = int(elem.get("version", "0")) if _positive_int(elem.get("version", "")) else 0
    violations = list(rules(elem))
    if not violations:
        try:
            v = xmlio.element_to_version(elem)
        except ValueError as exc:
            violations.append(Violation("PARSE_ERROR", "/model", str(exc)))
        else:
            violations.extend(validate_version(v).violations)
    return ValidationReport(key, version, tuple(violations))


def _positive_int(text: str) -> bool:
    return text.isdigit() and int(text) >= 1


# ---------------------------------------------------------------------------
# Migration registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Migration:
    """One pure document transform from schema N to N+1."""

    from_schema: int
    to_schema: int
    transform: Callable[[ET.Element], ET.Element]
    description: str


class MigrationRegistry:
    """The chain of registered migrations, one per source schema."""

    def __init__(self) -> None:
        self._steps: dict[int, Migration] = {}

    def register(self, m: Migration) -> None:
        if m.to_schema != m.from_schema + 1:
            raise NonadjacentStep(
                "migration %d->%d skips versions; only N->N+1 allowed" % (m.from_schema, m.to_schema)
            )
        if m.from_schema in self._steps:
            raise DuplicateStep("a migration from schema %d is already registered" % m.from_schema)
        self._steps[m.from_schema] = m

    def chain(self, current: int, target: int) -> list[Migration]:
        steps = []
        for n in range(current, target):
            step = self._steps.get(n)
            if step is None:
                raise ChainGap("no migration from schema %d registered" % n)
            steps.append(step)
        return steps


def _add_license(elem: ET.Element) -> ET.Element:
    if not elem.findall("license"):
        ET.SubElement(elem, "license").text = DEFAULT_LICENSE
    return elem


MIGRATION_1_TO_2 = Migration(
    from_schema=1,
    to_schema=2,
    transform=_add_license,
    description="add the mandatory license element (CC BY-SA 4.0)",
)

registry = MigrationRegistry()
registry.register(MIGRATION_1_TO_2)


# ---------------------------------------------------------------------------
# Store migration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DocumentOutcome:
    """Result of migrating one stored document."""

    key: str
    version: int
    report: ValidationReport | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and (self.report is None or self.report.ok)


@dataclass(frozen=True)
class MigrationReport:
    from_schema: int
    to_schema: int
    dry_run: bool
    outcomes: tuple[DocumentOutcome, ...] = ()
    backup: Path | None = None

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    @property
    def failures(self) -> tuple[DocumentOutcome, ...]:
        return tuple(o for o in self.outcomes if not o.ok)


def migrate_store(
    store: Store,
    target: int,
    migrations: MigrationRegistry | None = None,
    dry_run: bool = False,
) -> MigrationReport:
    """Migrate every stored document to the target schema, all or nothing.

    The work happens on a full copy of the store directory; the copy replaces
    the live directory only after every document validated at every step, so
    a failure of any kind leaves the store byte-identical.  The displaced
    pre-state directory is retained as the backup.
    """
    migrations = migrations if migrations is not None else registry
    with store.exclusive():
        current = store.schema_version
        if target < current:
            raise MigrationFailed("store is at schema %d; downgrade to %d not supported" % (current, target))
        if target == current:
            return MigrationReport(current, target, dry_run)
        steps = migrations.chain(current, target)

        if dry_run:
            outcomes = _run_documents(store.root, steps, write=False)
            return MigrationReport(current, target, True, tuple(outcomes))

        work = store.root.parent / (store.root.name + ".migrating-" + os.urandom(4).hex())
        try:
            shutil.copytree(store.root, work)
            outcomes = _run_documents(work, steps, write=True)
            report = MigrationReport(current, target, False, tuple(outcomes))
            if not report.ok:
                raise MigrationFailed(
                    "%d of %d documents failed; store unchanged" % (len(report.failures), len(outcomes)),
                    report=report,
                )
            meta = ET.Element("store")
            meta.set("schema", str(target))
            (work / "meta.xml").write_bytes(xmlio.write_canonical(meta).encode("utf-8"))
            backup = _swap_in(store, work)
        except Exception:
            shutil.rmtree(work, ignore_errors=True)
            raise
        store.reload()
        return MigrationReport(current, target, False, tuple(outcomes), backup=backup)


def _run_documents(root: Path, steps: list[Migration], write: bool) -> list[DocumentOutcome]:
    """Validate-transform-validate every document under a store root."""
    outcomes = []
    models_dir = root / "models"
    doc_paths = sorted(models_dir.glob("*/v*.xml")) if models_dir.is_dir() else []
    for path in doc_paths:
        key = path.parent.name
        try:
            number = int(path.stem[1:])
        except ValueError:
            number = 0
        try:
            elem = xmlio.parse_tree(path.read_bytes())
        except (OSError, ValueError) as exc:
            outcomes.append(DocumentOutcome(key, number, error="unreadable document: %s" % exc))
            continue
        outcome = _migrate_document(elem, key, number, steps)
        outcomes.append(outcome)
        if write and outcome.ok:
            data = xmlio.write_canonical(elem).encode("utf-8")
            try:
                path.write_bytes(data)
            except OSError as exc:
                raise IoFailure("could not write migrated %s: %s" % (path, exc)) from exc
    return outcomes


def _migrate_document(elem: ET.Element, key: str, number: int, steps: list[Migration]) -> DocumentOutcome:
    report = validate_document(elem, steps[0].from_schema)
    if not report.ok:
        return DocumentOutcome(key, number, report=report)
    for step in steps:
        try:
            step.transform(elem)
        except Exception as exc:
            return DocumentOutcome(
                key, number, error="transform %d->%d raised: %s" % (step.from_schema, step.to_schema, exc)
            )
        elem.set("schema", str(step.to_schema))
        report = validate_document(elem, step.to_schema)
        if not report.ok:
            return DocumentOutcome(key, number, report=report)
    return DocumentOutcome(key, number, report=report)


def _swap_in(store: Store, work: Path) -> Path:
    """Replace the live store directory with the migrated copy.

    The displaced pre-state becomes the backup.  If the second rename fails
    the first is undone, so the live path never stays vacant.
    """
    backup = _free_path(store.root.parent, store.root.name + ".backup")
    store.migrating.set()
    try:
        os.rename(store.root, backup)
        try:
            os.rename(work, store.root)
        except OSError as exc:
            os.rename(backup, store.root)
            raise IoFailure("could not activate migrated store: %s" % exc) from exc
    finally:
        store.migrating.clear()
    return backup


def _free_path(parent: Path, base: str) -> Path:
    candidate = parent / base
    n = 2
    while candidate.exists():
        candidate = parent / ("%s-%d" % (base, n))
        n += 1
    return candidate
