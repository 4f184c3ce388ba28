"""Canonical XML document format.

One serialization is the contract for hashing, storage, and the wire: fixed
element and attribute order, two-space indent, LF line endings, self-closed
empty elements, and deterministic escaping.  ``serialize -> parse ->
serialize`` is byte-stable for every valid document.

Model documents look like::

    <model key="k" version="1" status="edit" edited-by="alice" schema="2">
      <description>
        <title>T</title>
        <authors>
          <author position="0" affiliation="TU">Alice A.</author>
        </authors>
        <text>See \\cite{S97} and \\media{m1}.</text>
        <keywords>
          <keyword>surface</keyword>
        </keywords>
        <references>
          <reference key="S97" type="article">
            <attr name="author">O. Schramm</attr>
          </reference>
        </references>
        <date>2015-09-01T12:00:00Z</date>
      </description>
      <media-objects>
        <media-object id="m1">
          <title>View</title>
          <text>...</text>
          <file blob="..." name="a.obj" type="model/obj" size="123"/>
          <preview blob="..."/>
        </media-object>
      </media-objects>
      <license>CC BY-SA 4.0</license>
    </model>

The ``date`` element carries the version's full UTC creation timestamp; the
description's calendar date is derived from it.
"""

from __future__ import annotations

from datetime import datetime, timezone
from xml.etree import ElementTree as ET

from .core import (
    AuthorRef,
    Description,
    FileRef,
    MediaObject,
    ModelVersion,
    Reference,
    Status,
)

INDENT = "  "


# ---------------------------------------------------------------------------
# Generic canonical writer
# ---------------------------------------------------------------------------


def escape_text(value: str) -> str:
    value = value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return value.replace("\r", "&#13;")


def escape_attr(value: str) -> str:
    value = value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    value = value.replace('"', "&quot;")
    return value.replace("\t", "&#9;").replace("\n", "&#10;").replace("\r", "&#13;")


def write_canonical(elem: ET.Element) -> str:
    """Serialize an element tree in canonical form (keeps the tree's own
    attribute order; model documents are built in spec order)."""
    lines: list[str] = []
    _write_element(elem, 0, lines)
    return "\n".join(lines) + "\n"


def _write_element(elem: ET.Element, depth: int, lines: list[str]) -> None:
    indent = INDENT * depth
    attrs = "".join(' %s="%s"' % (k, escape_attr(v)) for k, v in elem.attrib.items())
    children = list(elem)
    text = elem.text or ""
    if children:
        if text.strip():
            raise ValueError("mixed content in <%s> is not representable canonically" % elem.tag)
        lines.append("%s<%s%s>" % (indent, elem.tag, attrs))
        for child in children:
            if (child.tail or "").strip():
                raise ValueError("tail text after <%s> is not representable canonically" % child.tag)
            _write_element(child, depth + 1, lines)
        lines.append("%s</%s>" % (indent, elem.tag))
    elif text:
        lines.append("%s<%s%s>%s</%s>" % (indent, elem.tag, attrs, escape_text(text), elem.tag))
    else:
        lines.append("%s<%s%s/>" % (indent, elem.tag, attrs))


def parse_tree(data: bytes | str) -> ET.Element:
    """Parse an XML document, refusing DOCTYPE declarations outright."""
    if isinstance(data, bytes):
        head = data[:256].lstrip()
        probe = head.decode("utf-8", "replace")
    else:
        probe = data[:256].lstrip()
    if probe.upper().startswith("<!DOCTYPE") or "<!DOCTYPE" in probe.upper():
        raise ValueError("DOCTYPE declarations are not accepted")
    try:
        return ET.fromstring(data)
    except ET.ParseError as exc:
        raise ValueError("malformed XML: %s" % exc) from exc


# ---------------------------------------------------------------------------
# Timestamps
# ---------------------------------------------------------------------------


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    if not text.endswith("Z"):
        raise ValueError("timestamp %r is not in UTC Z form" % text)
    try:
        naive = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError as exc:
        raise ValueError("bad timestamp %r" % text) from exc
    return naive.replace(tzinfo=timezone.utc)


# ---------------------------------------------------------------------------
# Model documents
# ---------------------------------------------------------------------------


def version_to_element(v: ModelVersion) -> ET.Element:
    model = ET.Element("model")
    model.set("key", v.key)
    model.set("version", str(v.version))
    model.set("status", v.status.value)
    model.set("edited-by", v.edited_by)
    model.set("schema", str(v.schema_version))

    desc = ET.SubElement(model, "description")
    ET.SubElement(desc, "title").text = v.description.title
    authors = ET.SubElement(desc, "authors")
    for a in sorted(v.description.authors, key=lambda a: a.position):
        ae = ET.SubElement(authors, "author")
        ae.set("position", str(a.position))
        if a.affiliation is not None:
            ae.set("affiliation", a.affiliation)
        ae.text = a.name
    ET.SubElement(desc, "text").text = v.description.text
    keywords = ET.SubElement(desc, "keywords")
    for kw in sorted(v.description.keywords):
        ET.SubElement(keywords, "keyword").text = kw
    references = ET.SubElement(desc, "references")
    for r in v.description.references:
        re_ = ET.SubElement(references, "reference")
        re_.set("key", r.ref_key)
        re_.set("type", r.entry_type)
        for name, value in r.attributes:
            attr = ET.SubElement(re_, "attr")
            attr.set("name", name)
            attr.text = value
    ET.SubElement(desc, "date").text = format_timestamp(v.created_at)

    media_objects = ET.SubElement(model, "media-objects")
    for m in v.media:
        me = ET.SubElement(media_objects, "media-object")
        me.set("id", m.media_id)
        ET.SubElement(me, "title").text = m.title
        ET.SubElement(me, "text").text = m.text
        for f in m.files:
            fe = ET.SubElement(me, "file")
            fe.set("blob", f.blob_id)
            fe.set("name", f.filename)
            fe.set("type", f.media_type)
            fe.set("size", str(f.size_bytes))
        if m.preview is not None:
            pe = ET.SubElement(me, "preview")
            pe.set("blob", m.preview)

    if v.license is not None:
        ET.SubElement(model, "license").text = v.license
    return model


def serialize_version(v: ModelVersion) -> bytes:
    return write_canonical(version_to_element(v)).encode("utf-8")


def element_to_version(model: ET.Element) -> ModelVersion:
    if model.tag != "model":
        raise ValueError("root element is <%s>, expected <model>" % model.tag)
    key = _req_attr(model, "key")
    version = _int_attr(model, "version")
    status_text = _req_attr(model, "status")
    try:
        status = Status(status_text)
    except ValueError:
        raise ValueError("unknown status %r" % status_text) from None
    edited_by = _req_attr(model, "edited-by")
    schema = _int_attr(model, "schema")

    desc_elem = _one_child(model, "description")
    created_at = parse_timestamp(_leaf_text(_one_child(desc_elem, "date")))
    description = _parse_description(desc_elem)

    media: list[MediaObject] = []
    mo_container = _one_child(model, "media-objects")
    for me in mo_container:
        if me.tag != "media-object":
            raise ValueError("unexpected <%s> in <media-objects>" % me.tag)
        media.append(_parse_media_object(me))

    license_elems = model.findall("license")
    if len(license_elems) > 1:
        raise ValueError("more than one <license> element")
    license_text = _leaf_text(license_elems[0]) if license_elems else None

    return ModelVersion(
        key=key,
        version=version,
        status=status,
        edited_by=edited_by,
        schema_version=schema,
        description=description,
        media=tuple(media),
        created_at=created_at,
        license=license_text,
    )


def parse_version(data: bytes | str) -> ModelVersion:
    return element_to_version(parse_tree(data))


def _parse_description(desc: ET.Element) -> Description:
    title = _leaf_text(_one_child(desc, "title"))
    authors: list[AuthorRef] = []
    for ae in _one_child(desc, "authors"):
        if ae.tag != "author":
            raise ValueError("unexpected <%s> in <authors>" % ae.tag)
        authors.append(
            AuthorRef(
                name=ae.text or "",
                position=_int_attr(ae, "position"),
                affiliation=ae.get("affiliation"),
            )
        )
    text = _leaf_text(_one_child(desc, "text"))
    keywords = frozenset(_leaf_text(kw) for kw in _one_child(desc, "keywords"))
    references: list[Reference] = []
    for re_ in _one_child(desc, "references"):
        if re_.tag != "reference":
            raise ValueError("unexpected <%s> in <references>" % re_.tag)
        attrs = tuple((_req_attr(attr, "name"), attr.text or "") for attr in re_)
        references.append(
            Reference(ref_key=_req_attr(re_, "key"), entry_type=_req_attr(re_, "type"), attributes=attrs)
        )
    return Description(
        title=title,
        authors=tuple(sorted(authors, key=lambda a: a.position)),
        text=text,
        keywords=keywords,
        references=tuple(references),
    )


def _parse_media_object(me: ET.Element) -> MediaObject:
    files: list[FileRef] = []
    preview: str | None = None
    for child in me:
        if child.tag == "file":
            files.append(
                FileRef(
                    blob_id=_req_attr(child, "blob"),
                    filename=_req_attr(child, "name"),
                    media_type=_req_attr(child, "type"),
                    size_bytes=_int_attr(child, "size"),
                )
            )
        elif child.tag == "preview":
            if preview is not None:
                raise ValueError("more than one <preview> in a media object")
            preview = _req_attr(child, "blob")
    return MediaObject(
        media_id=_req_attr(me, "id"),
        title=_leaf_text(_one_child(me, "title")),
        text=_leaf_text(_one_child(me, "text")),
        files=tuple(files),
        preview=preview,
    )


def _one_child(elem: ET.Element, tag: str) -> ET.Element:
    found = elem.findall(tag)
    if len(found) != 1:
        raise ValueError("expected exactly one <%s> in <%s>, found %d" % (tag, elem.tag, len(found)))
    return found[0]


def _leaf_text(elem: ET.Element) -> str:
    if len(elem):
        raise ValueError("<%s> must not have children" % elem.tag)
    return elem.text or ""


def _req_attr(elem: ET.Element, name: str) -> str:
    value = elem.get(name)
    if value is None:
        raise ValueError("<%s> is missing required attribute %r" % (elem.tag, name))
    return value


def _int_attr(elem: ET.Element, name: str) -> int:
    raw = _req_attr(elem, name)
    try:
        return int(raw)
    except ValueError:
        raise ValueError("attribute %s=%r on <%s> is not an integer" % (name, raw, elem.tag)) from None
