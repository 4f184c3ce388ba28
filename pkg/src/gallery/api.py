"""REST interface.

All model payloads travel as the canonical XML document format; blob uploads
and downloads are raw bytes; errors are a fixed XML error document carrying a
stable machine code.  Everything under ``/api`` except login requires
credentials (session cookie or Basic); the public permalink routes under
``/models`` serve approved content to anyone.

Request handling order is fixed: authenticate (401), then authorize
(403, or 404 for anonymous callers so existence never leaks), then validate
(400), then act.
"""

from __future__ import annotations

import base64
import binascii
from pathlib import Path
from typing import Iterable
from xml.etree import ElementTree as ET

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import xmlio
from .auth import ModelRole, User
from .config import Config
from .core import Description, MediaObject, ModelHistory, ModelVersion
from .errors import BadRequest, GalleryError, NotFound, PayloadTooLarge, Unauthenticated
from .events import AuditEvent, Notification
from .workflow import GalleryService, Verdict, VerdictKind

SESSION_COOKIE = "gallery_session"

_HTTP_STATUS = {
    "UNAUTHENTICATED": 401,
    "BAD_CREDENTIALS": 401,
    "FORBIDDEN": 403,
    "NOT_FOUND": 404,
    "INVALID_TITLE": 400,
    "BAD_REQUEST": 400,
    "EMPTY_REVIEW_TEXT": 400,
    "VALIDATION_FAILED": 400,
    "WEAK_PASSWORD": 400,
    "UNKNOWN_USER": 400,
    "DUPLICATE_KEY": 409,
    "VERSION_CONFLICT": 409,
    "ILLEGAL_STATE": 409,
    "FORBIDDEN_STATE": 409,
    "LAST_OWNER": 409,
    "PAYLOAD_TOO_LARGE": 413,
    "SERVICE_MIGRATING": 503,
}


# ---------------------------------------------------------------------------
# XML response helpers
# ---------------------------------------------------------------------------


def _xml_bytes(elem: ET.Element) -> bytes:
    return xmlio.write_canonical(elem).encode("utf-8")


def _xml_response(elem: ET.Element, status_code: int = 200, headers: dict[str, str] | None = None) -> Response:
    return Response(
        content=_xml_bytes(elem), status_code=status_code, media_type="application/xml", headers=headers
    )


def _doc_response(v: ModelVersion, status_code: int = 200, headers: dict[str, str] | None = None) -> Response:
    return Response(
        content=xmlio.serialize_version(v),
        status_code=status_code,
        media_type="application/xml",
        headers=headers,
    )


def _error_body(code: str, message: str) -> bytes:
    elem = ET.Element("error")
    elem.set("code", code)
    ET.SubElement(elem, "message").text = message
    return _xml_bytes(elem)


def _audit_element(e: AuditEvent) -> ET.Element:
    elem = ET.Element("audit-event")
    elem.set("key", e.key)
    elem.set("version", str(e.version))
    elem.set("actor", e.actor)
    elem.set("from", e.from_status.value)
    elem.set("to", e.to_status.value)
    elem.set("at", xmlio.format_timestamp(e.at))
    if e.review_text is not None:
        ET.SubElement(elem, "review-text").text = e.review_text
    return elem


def _notification_element(n: Notification) -> ET.Element:
    elem = ET.Element("notification")
    elem.set("id", str(n.id))
    elem.set("recipient", n.recipient)
    elem.set("key", n.key)
    elem.set("version", str(n.version))
    elem.set("event", n.event.value)
    elem.set("at", xmlio.format_timestamp(n.at))
    elem.set("read", "true" if n.read else "false")
    if n.review_text is not None:
        ET.SubElement(elem, "review-text").text = n.review_text
    return elem


def _blob_list_element(tag: str, blob_ids: Iterable[str]) -> ET.Element:
    ids = sorted(blob_ids)
    elem = ET.Element(tag)
    elem.set("count", str(len(ids)))
    for blob_id in ids:
        ET.SubElement(elem, "blob").set("id", blob_id)
    return elem


def _permissions_element(history: ModelHistory) -> ET.Element:
    elem = ET.Element("permissions")
    elem.set("key", history.key)
    for name in sorted(history.owners):
        ET.SubElement(elem, "owner").text = name
    for name in sorted(history.editors):
        ET.SubElement(elem, "editor").text = name
    return elem


# ---------------------------------------------------------------------------
# Request parsing helpers
# ---------------------------------------------------------------------------


def _parse_xml_body(data: bytes) -> ET.Element:
    try:
        return xmlio.parse_tree(data)
    except ValueError as exc:
        raise BadRequest("request body is not well-formed XML: %s" % exc) from exc


def _parse_document_body(data: bytes, key: str) -> tuple[int, Description, tuple[MediaObject, ...]]:
    """Extract the client-controlled parts of a PUT model document.

    The body's version attribute names the version the client last saw
    (stale-write protection); status, edited-by, schema, and date are
    server-controlled and ignored.
    """
    try:
        v = xmlio.parse_version(data)
    except ValueError as exc:
        raise BadRequest("request body is not a model document: %s" % exc) from exc
    if v.key != key:
        raise BadRequest("document key %r does not match the request path %r" % (v.key, key))
    return v.version, v.description, v.media


async def _read_body(request: Request, limit: int) -> bytes:
    declared = request.headers.get("content-length")
    if declared is not None and declared.isdigit() and int(declared) > limit:
        raise PayloadTooLarge("declared length %s exceeds the %d byte limit" % (declared, limit))
    chunks: list[bytes] = []
    total = 0
    async for chunk in request.stream():
        total += len(chunk)
        if total > limit:
            raise PayloadTooLarge("request body exceeds the %d byte limit" % limit)
        chunks.append(chunk)
    return b"".join(chunks)


# ---------------------------------------------------------------------------
# Application factory
# ---------------------------------------------------------------------------


def create_app(service: GalleryService, config: Config, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="model gallery", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.service = service
    store = service.store
    body_limit = config.max_upload_bytes

    # -- plumbing -----------------------------------------------------------

    @app.exception_handler(GalleryError)
    async def _gallery_error(request: Request, exc: GalleryError) -> Response:
        status = _HTTP_STATUS.get(exc.code, 500)
        return Response(
            content=_error_body(exc.code, exc.message), status_code=status, media_type="application/xml"
        )

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException) -> Response:
        code = {401: "UNAUTHENTICATED", 403: "FORBIDDEN", 404: "NOT_FOUND", 405: "BAD_REQUEST"}.get(
            exc.status_code, "BAD_REQUEST" if exc.status_code < 500 else "IO_FAILURE"
        )
        return Response(
            content=_error_body(code, str(exc.detail)), status_code=exc.status_code, media_type="application/xml"
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError) -> Response:
        return Response(
            content=_error_body("BAD_REQUEST", "malformed request parameters"),
            status_code=400,
            media_type="application/xml",
        )

    @app.middleware("http")
    async def _migration_gate(request: Request, call_next):
        if store.migrating.is_set():
            return Response(
                content=_error_body("SERVICE_MIGRATING", "store migration in progress; retry shortly"),
                status_code=503,
                media_type="application/xml",
            )
        return await call_next(request)

    def _secure_transport(request: Request) -> bool:
        if request.url.scheme == "https":
            return True
        forwarded = request.headers.get("x-forwarded-proto", "")
        if forwarded.lower() == "https":
            return True
        client = request.client
        return client is not None and client.host in ("127.0.0.1", "::1", "localhost")

    def _maybe_user(request: Request) -> User | None:
        """The authenticated caller, or None when no credentials were sent.

        Credentials that are present but bad (expired session, wrong Basic
        pair, Basic over insecure transport) raise UNAUTHENTICATED rather
        than degrade to anonymous.
        """
        token = request.cookies.get(SESSION_COOKIE)
        if token:
            return service.auth.by_token(token)
        header = request.headers.get("authorization", "")
        if header.lower().startswith("basic "):
            if not _secure_transport(request):
                raise Unauthenticated("basic credentials refused on plaintext non-loopback connections")
            try:
                decoded = base64.b64decode(header[6:], validate=True).decode("utf-8")
                username, _, password = decoded.partition(":")
            except (binascii.Error, UnicodeDecodeError) as exc:
                raise Unauthenticated("malformed authorization header") from exc
            return service.auth.by_password(username, password)
        return None

    def _require_user(request: Request) -> User:
        user = _maybe_user(request)
        if user is None:
            raise Unauthenticated("credentials required")
        return user

    # -- session ------------------------------------------------------------

    @app.post("/api/login")
    async def login(request: Request) -> Response:
        form = await request.form()
        username = str(form.get("user", ""))
        password = str(form.get("pass", ""))
        session = service.auth.login(username, password)
        user = store.get_user(username)
        elem = ET.Element("session")
        elem.set("user", username)
        elem.set("display-name", user.display_name if user else "")
        elem.set("role", user.global_role.value if user else "")
        elem.set("expires-at", xmlio.format_timestamp(session.expires_at))
        response = _xml_response(elem)
        response.set_cookie(
            SESSION_COOKIE,
            session.token,
            max_age=int((session.expires_at - session.created_at).total_seconds()),
            httponly=True,
            secure=True,
            samesite="lax",
            path="/",
        )
        return response

    @app.post("/api/logout")
    async def logout(request: Request) -> Response:
        _require_user(request)
        token = request.cookies.get(SESSION_COOKIE)
        if token:
            service.auth.logout(token)
        response = _xml_response(ET.Element("ok"))
        response.delete_cookie(SESSION_COOKIE, path="/")
        return response

    # -- models ---------------------------------------------------------------

    @app.get("/api/models")
    async def list_models(request: Request) -> Response:
        user = _require_user(request)
        elem = ET.Element("models")
        for history, version in service.list_models(user):
            me = ET.SubElement(elem, "model")
            me.set("key", history.key)
            me.set("version", str(version.version))
            me.set("status", version.status.value)
            me.set("title", version.description.title)
            # role context so clients can badge their own models without
            # making authorization decisions themselves
            me.set("owners", " ".join(sorted(history.owners)))
            me.set("editors", " ".join(sorted(history.editors)))
        return _xml_response(elem)

    @app.post("/api/models")
    async def create_model(request: Request) -> Response:
        user = _require_user(request)
        body = _parse_xml_body(await _read_body(request, body_limit))
        if body.tag != "create-model" or "title" not in body.attrib:
            raise BadRequest("expected <create-model title=\"...\"/>")
        history = service.create_model(user, body.get("title", ""))
        return _doc_response(history.latest, status_code=201, headers={"Location": "/models/" + history.key})

    @app.get("/api/models/{key}")
    async def get_model(key: str, request: Request) -> Response:
        user = _require_user(request)
        return _doc_response(service.get_model(user, key))

    @app.put("/api/models/{key}")
    async def put_model(key: str, request: Request) -> Response:
        user = _require_user(request)
        base_version, description, media = _parse_document_body(await _read_body(request, body_limit), key)
        v = service.append_edit(user, key, description, media, expect_version=base_version)
        return _doc_response(v)

    @app.delete("/api/models/{key}")
    async def delete_model(key: str, request: Request) -> Response:
        user = _require_user(request)
        deleted = service.delete_model(user, key)
        elem = _blob_list_element("deleted", deleted)
        elem.set("key", key)
        return _xml_response(elem)

    @app.get("/api/models/{key}/versions/{number}")
    async def get_model_version(key: str, number: int, request: Request) -> Response:
        user = _require_user(request)
        return _doc_response(service.get_model(user, key, number))

    # -- transitions ------------------------------------------------------------

    @app.post("/api/models/{key}/submit")
    async def submit(key: str, request: Request) -> Response:
        user = _require_user(request)
        return _xml_response(_audit_element(service.submit(user, key)))

    @app.post("/api/models/{key}/review")
    async def review(key: str, request: Request) -> Response:
        user = _require_user(request)
        body = _parse_xml_body(await _read_body(request, body_limit))
        if body.tag != "review" or "verdict" not in body.attrib:
            raise BadRequest("expected <review verdict=\"...\"><review-text>...</review-text></review>")
        try:
            kind = VerdictKind(body.get("verdict", ""))
        except ValueError as exc:
            raise BadRequest("verdict must be approve, send_back, or reject") from exc
        text_elem = body.find("review-text")
        verdict = Verdict(kind, text_elem.text or "" if text_elem is not None else "")
        return _xml_response(_audit_element(service.review(user, key, verdict)))

    @app.post("/api/models/{key}/reopen")
    async def reopen(key: str, request: Request) -> Response:
        user = _require_user(request)
        return _doc_response(service.reopen(user, key))

    @app.post("/api/models/{key}/permissions")
    async def grant(key: str, request: Request) -> Response:
        user = _require_user(request)
        body = _parse_xml_body(await _read_body(request, body_limit))
        if body.tag != "grant" or "user" not in body.attrib or "role" not in body.attrib:
            raise BadRequest("expected <grant user=\"...\" role=\"owner|editor\"/>")
        try:
            role = ModelRole(body.get("role", ""))
        except ValueError as exc:
            raise BadRequest("role must be owner or editor") from exc
        history = service.grant(user, key, body.get("user", ""), role)
        return _xml_response(_permissions_element(history))

    # -- files -------------------------------------------------------------------

    @app.post("/api/models/{key}/media")
    async def upload_media(key: str, request: Request) -> Response:
        user = _require_user(request)
        filename = request.query_params.get("filename", "upload.bin")
        media_type = request.headers.get("content-type", "application/octet-stream").split(";")[0].strip()
        data = await _read_body(request, body_limit)
        blob_id = service.upload_blob(user, key, data)
        elem = ET.Element("file")
        elem.set("blob", blob_id)
        elem.set("name", filename)
        elem.set("type", media_type or "application/octet-stream")
        elem.set("size", str(len(data)))
        return _xml_response(elem, status_code=201)

    @app.get("/api/files/{blob_id}")
    async def get_file(blob_id: str, request: Request) -> Response:
        user = _require_user(request)
        data, ref = service.get_file(user, blob_id)
        return _file_response(data, ref)

    # -- notifications ----------------------------------------------------------------

    @app.get("/api/notifications")
    async def notifications(request: Request) -> Response:
        user = _require_user(request)
        elem = ET.Element("notifications")
        for n in service.notifications_for(user):
            elem.append(_notification_element(n))
        return _xml_response(elem)

    @app.post("/api/notifications/{notification_id}/read")
    async def mark_read(notification_id: int, request: Request) -> Response:
        user = _require_user(request)
        return _xml_response(_notification_element(service.mark_read(user, notification_id)))

    # -- administration ----------------------------------------------------------------

    @app.post("/api/admin/gc")
    async def admin_gc(request: Request) -> Response:
        user = _require_user(request)
        return _xml_response(_blob_list_element("garbage-collected", service.collect_garbage(user)))

    @app.get("/api/admin/audit")
    async def admin_audit(request: Request) -> Response:
        user = _require_user(request)
        elem = ET.Element("audit")
        for event in service.read_audit(user):
            elem.append(_audit_element(event))
        return _xml_response(elem)

    # -- public permalinks ----------------------------------------------------------------

    @app.get("/models/{key}")
    async def public_model(key: str) -> Response:
        """The permalink: always the current approved version."""
        v = service.get_model(None, key)
        return _doc_response(v)

    @app.get("/models/{key}/versions/{number}")
    async def public_model_version(key: str, number: int, request: Request) -> Response:
        user = _maybe_user(request)
        return _doc_response(service.get_model(user, key, number))

    if ui_dir is not None and ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _file_response(data: bytes, ref) -> Response:
    media_type = ref.media_type if ref is not None else "application/octet-stream"
    headers = {}
    if ref is not None:
        headers["Content-Disposition"] = 'attachment; filename="%s"' % ref.filename.replace('"', "")
    return Response(content=data, media_type=media_type or "application/octet-stream", headers=headers)
