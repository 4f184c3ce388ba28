"""Acceptance suite. One test per product-level guarantee, each printing a
single pass/fail line under -v; the tolerances (case counts, sequence lengths,
byte identity) are stated in the docstrings."""

from __future__ import annotations

import base64
import collections
import hashlib
import itertools
import random
import re
import threading
import time
from datetime import datetime, timedelta, timezone
from xml.etree import ElementTree as ET

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from gallery.api import create_app
from gallery.auth import Action, GlobalRole, ModelRole, hash_password, permit, verify_password
from gallery.config import Config
from gallery.core import FileRef, MediaObject, Status, parse_rich_text, serialize_rich_text
from gallery.errors import GalleryError, MigrationFailed
from gallery.events import NotificationEvent
from gallery.migration import migrate_store, validate_document
from gallery.seed import FIXTURE_KEYS, seed_store, tiny_obj, tiny_png
from gallery.storage import Store
from gallery.workflow import GalleryService, Verdict, VerdictKind
from gallery.xmlio import parse_tree, parse_version, serialize_version

from conftest import CAST, PASSWORD, make_description, make_history, make_user
from test_migration import seed_v1_store, tree_digest

ALL_STATUSES = (Status.EDIT, Status.PENDING, Status.APPROVED, Status.REJECTED)
ALL_ACTIONS = (
    Action.READ,
    Action.WRITE,
    Action.SUBMIT,
    Action.REVIEW,
    Action.GRANT,
    Action.DELETE,
    Action.REOPEN,
)


# -- 1: permission matrix ---------------------------------------------------------

EVERY = set(ALL_STATUSES)
NOTHING: set[Status] = set()
# single-version histories: an APPROVED head is the only published version,
# so the owner's delete right holds exactly in the other three states
OWNER_ROW = {
    Action.READ: EVERY,
    Action.WRITE: {Status.EDIT},
    Action.SUBMIT: {Status.EDIT},
    Action.REVIEW: NOTHING,
    Action.GRANT: EVERY,
    Action.DELETE: {Status.EDIT, Status.PENDING, Status.REJECTED},
    Action.REOPEN: {Status.APPROVED},
}
SPECTATOR_ROW = {action: NOTHING for action in ALL_ACTIONS} | {Action.READ: {Status.APPROVED}}

EXPECTED_MATRIX = {
    "admin": {
        Action.READ: EVERY,
        Action.WRITE: EVERY,
        Action.SUBMIT: {Status.EDIT},
        Action.REVIEW: {Status.PENDING},
        Action.GRANT: EVERY,
        Action.DELETE: EVERY,
        Action.REOPEN: {Status.APPROVED},
    },
    "owner": OWNER_ROW,
    "editor": {action: NOTHING for action in ALL_ACTIONS}
    | {Action.READ: EVERY, Action.WRITE: {Status.EDIT}},
    "reviewer": {action: NOTHING for action in ALL_ACTIONS}
    | {
        Action.READ: {Status.PENDING, Status.APPROVED, Status.REJECTED},
        Action.WRITE: {Status.PENDING},
        Action.REVIEW: {Status.PENDING},
    },
    "reviewing owner": OWNER_ROW,
    "outside author": SPECTATOR_ROW,
    "anonymous": SPECTATOR_ROW,
}


def test_criterion_1_permission_matrix():
    """All 196 actor-class x status x action cells match the access table."""
    actors = {
        "admin": make_user("adm", GlobalRole.ADMIN),
        "owner": make_user("own", GlobalRole.AUTHOR),
        "editor": make_user("edi", GlobalRole.AUTHOR),
        "reviewer": make_user("rev", GlobalRole.REVIEWER),
        "reviewing owner": make_user("revown", GlobalRole.REVIEWER),
        "outside author": make_user("aut", GlobalRole.AUTHOR),
        "anonymous": None,
    }
    histories = {
        status: make_history(key="probe", status=status, owners=("own", "revown"), editors=("edi",))
        for status in ALL_STATUSES
    }
    checked = 0
    for label, user in actors.items():
        for status, history in histories.items():
            for action in ALL_ACTIONS:
                expected = status in EXPECTED_MATRIX[label][action]
                got = permit(user, history, 1, action)
                assert got == expected, "%s / %s / %s: expected %s, got %s" % (
                    label,
                    status.value,
                    action.value,
                    expected,
                    got,
                )
                checked += 1
    assert checked == 196

    # the three cells worth calling out by name
    assert all(permit(actors["admin"], histories[s], 1, Action.WRITE) for s in ALL_STATUSES)
    assert not permit(actors["owner"], histories[Status.PENDING], 1, Action.WRITE)
    assert not permit(actors["reviewing owner"], histories[Status.PENDING], 1, Action.REVIEW)

    # versions that do not exist never authorize anything
    for user in actors.values():
        assert not any(permit(user, histories[Status.APPROVED], 2, a) for a in ALL_ACTIONS)


# -- 2: state-machine fuzz ---------------------------------------------------------

LEGAL_EDGES = {
    (Status.EDIT, Status.PENDING),
    (Status.PENDING, Status.APPROVED),
    (Status.PENDING, Status.EDIT),
    (Status.PENDING, Status.REJECTED),
    (Status.APPROVED, Status.EDIT),
}

FUZZ_TITLES = {
    "alpha_surface": "Alpha Surface",
    "beta_surface": "Beta Surface",
    "gamma_surface": "Gamma Surface",
}

VERDICT_STATUS = {
    VerdictKind.APPROVE: Status.APPROVED,
    VerdictKind.SEND_BACK: Status.EDIT,
    VerdictKind.REJECT: Status.REJECTED,
}


class Shadow:
    """What the store must now contain for one model key."""

    __slots__ = ("count", "status", "frozen")

    def __init__(self) -> None:
        self.count = 1
        self.status = Status.EDIT
        self.frozen: dict[int, str] = {}


def _digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def _check_key(store: Store, key: str, shadow: Shadow) -> None:
    files = {p.name for p in (store.root / "models" / key).glob("v*.xml")}
    assert files == {"v%d.xml" % n for n in range(1, shadow.count + 1)}, "non-contiguous versions for %s" % key
    latest = parse_version(store.version_bytes(key, shadow.count))
    assert latest.version == shadow.count
    assert latest.status is shadow.status, "%s: store says %s, expected %s" % (key, latest.status, shadow.status)
    for n, frozen in shadow.frozen.items():
        assert _digest(store.version_bytes(key, n)) == frozen, "published version %s/v%d mutated" % (key, n)


def _fuzz_episode(root, seed: int, steps: int) -> collections.Counter:
    rng = random.Random(seed)
    store = Store.initialize(root)
    roles = (
        ("fadmin", GlobalRole.ADMIN),
        ("ursula", GlobalRole.AUTHOR),
        ("victor", GlobalRole.AUTHOR),
        ("rita", GlobalRole.REVIEWER),
        ("ralph", GlobalRole.REVIEWER),
    )
    actors = []
    for name, role in roles:
        user = make_user(name, role)
        store.add_user(user)
        actors.append(user)
    service = GalleryService(store)
    shadows: dict[str, Shadow] = {}
    counters: collections.Counter = collections.Counter()
    keys = sorted(FUZZ_TITLES)

    def no_resurrection(shadow: Shadow, op: str) -> None:
        assert shadow.status is not Status.REJECTED, "a rejected model accepted %s" % op

    for step in range(steps):
        key = rng.choice(keys)
        actor = rng.choice(actors)
        shadow = shadows.get(key)
        if shadow is None:
            op = "create"
        else:
            op = rng.choice(
                ("edit", "edit", "edit", "submit", "submit", "review", "review", "reopen", "grant", "delete")
            )
        counters[op] += 1
        try:
            if op == "create":
                service.create_model(actor, FUZZ_TITLES[key])
                shadows[key] = Shadow()
            elif op == "edit":
                base = shadow.count if rng.random() > 0.1 else max(1, shadow.count - 1)
                service.append_edit(
                    actor, key, make_description(text="Revision %d." % step), (), expect_version=base
                )
                no_resurrection(shadow, op)
                shadow.count += 1
            elif op == "submit":
                service.submit(actor, key)
                no_resurrection(shadow, op)
                shadow.status = Status.PENDING
            elif op == "review":
                kind = rng.choice(
                    (VerdictKind.APPROVE, VerdictKind.APPROVE, VerdictKind.SEND_BACK, VerdictKind.REJECT)
                )
                service.review(actor, key, Verdict(kind, "Reviewed at step %d." % step))
                no_resurrection(shadow, op)
                shadow.status = VERDICT_STATUS[kind]
                if shadow.status in (Status.APPROVED, Status.REJECTED):
                    shadow.frozen[shadow.count] = _digest(store.version_bytes(key, shadow.count))
            elif op == "reopen":
                service.reopen(actor, key)
                no_resurrection(shadow, op)
                shadow.count += 1
                shadow.status = Status.EDIT
            elif op == "grant":
                service.grant(
                    actor, key, rng.choice(actors).username, rng.choice((ModelRole.OWNER, ModelRole.EDITOR))
                )
            elif op == "delete":
                service.delete_model(actor, key)
                del shadows[key]
            counters[op + "_ok"] += 1
        except GalleryError:
            counters[op + "_err"] += 1
        if key in shadows:
            _check_key(store, key, shadows[key])
        else:
            assert not store.has_key(key)

    for key, shadow in shadows.items():
        _check_key(store, key, shadow)
    for event in store.read_audit(existing_keys_only=False):
        assert (event.from_status, event.to_status) in LEGAL_EDGES, "illegal transition recorded: %s" % event
    return counters


def test_criterion_2_state_machine_fuzz(tmp_path):
    """10,000 random workflow actions (5 users, 3 models): legal edges only,
    published bytes frozen, contiguous numbering, rejection absorbing."""
    episodes, steps = 50, 200
    totals: collections.Counter = collections.Counter()
    for episode in range(episodes):
        totals += _fuzz_episode(tmp_path / ("ep_%02d" % episode), seed=0xC2000 + episode, steps=steps)
    attempted = sum(totals[op] for op in ("create", "edit", "submit", "review", "reopen", "grant", "delete"))
    assert attempted == episodes * steps == 10_000
    for op in ("create_ok", "edit_ok", "submit_ok", "review_ok", "reopen_ok", "grant_ok", "delete_ok"):
        assert totals[op] > 0, "fuzzer never exercised %s (%s)" % (op, totals)
    # stale bases and misassigned actors must actually have been refused
    assert totals["edit_err"] > 0 and totals["review_err"] > 0


# -- 3: garbage collection --------------------------------------------------------


def test_criterion_3_gc_safety(tmp_path):
    """1,200 interleaved upload/attach/detach/delete/GC steps: every GC ends
    with the on-disk blob set exactly the referenced set, and referenced blobs
    never fail to read."""
    rng = random.Random(0xC3)
    store = Store.initialize(tmp_path / "store")
    admin = make_user("gadmin", GlobalRole.ADMIN)
    owner = make_user("gowner", GlobalRole.AUTHOR)
    store.add_user(admin)
    store.add_user(owner)
    service = GalleryService(store)

    titles = {"alpha_mesh": "Alpha Mesh", "beta_mesh": "Beta Mesh", "gamma_mesh": "Gamma Mesh"}
    latest = {}
    for key, title in titles.items():
        latest[key] = store.load_history(service.create_model(owner, title).key).latest

    contents = [("payload %03d" % n).encode() for n in range(120)]
    sizes: dict[str, int] = {}
    known: set[str] = set()
    media_serial = itertools.count()
    counters: collections.Counter = collections.Counter()

    def referenced() -> set[str]:
        # recomputed from the documents themselves, not from the store's GC helper
        out: set[str] = set()
        for key in store.list_keys():
            for v in store.load_history(key).versions:
                out |= v.blob_ids()
        return out

    def sweep(ids) -> None:
        for blob_id in ids:
            data = store.get_blob(blob_id)  # any failure here fails the criterion
            assert _digest(data) == blob_id

    steps = 1_200
    for step in range(steps):
        keys = sorted(latest)
        attachable = sorted(b for b in known if store.blob_exists(b))
        ops = ["upload"] * 5 + ["gc"] * 2 + ["read"] * 3
        if attachable and keys:
            ops += ["attach"] * 4
        if any(latest[k].media for k in keys):
            ops += ["detach"] * 2
        if len(keys) > 1:
            ops += ["delete"]
        if len(latest) < len(titles):
            ops += ["create"]
        op = rng.choice(ops)
        counters[op] += 1

        if op == "upload":
            data = rng.choice(contents)
            blob = service.upload_blob(owner, rng.choice(keys), data)
            sizes[blob] = len(data)
            known.add(blob)
        elif op == "attach":
            key = rng.choice(keys)
            blob = rng.choice(attachable)
            preview = rng.choice(attachable) if rng.random() < 0.2 else None
            n = next(media_serial)
            mo = MediaObject(
                media_id="m%d" % n,
                title="Mesh %d" % n,
                text="",
                files=(FileRef(blob, "f%d.bin" % n, "application/octet-stream", sizes[blob]),),
                preview=preview,
            )
            latest[key] = service.append_edit(
                owner, key, latest[key].description, latest[key].media + (mo,)
            )
        elif op == "detach":
            key = rng.choice([k for k in keys if latest[k].media])
            media = list(latest[key].media)
            media.pop(rng.randrange(len(media)))
            latest[key] = service.append_edit(owner, key, latest[key].description, tuple(media))
        elif op == "delete":
            key = rng.choice(keys)
            service.delete_model(owner, key)
            del latest[key]
            sweep(referenced())
        elif op == "create":
            key = next(k for k in titles if k not in latest)
            latest[key] = store.load_history(service.create_model(owner, titles[key]).key).latest
        elif op == "gc":
            purged = service.collect_garbage(admin)
            counters["gc_purged"] += len(purged)
            on_disk = set(store.iter_blob_ids())
            refs = referenced()
            assert on_disk == refs, "GC left %s, expected %s" % (
                sorted(on_disk - refs),
                sorted(refs - on_disk),
            )
            sweep(refs)
            known &= on_disk
        elif op == "read":
            refs = sorted(referenced())
            if refs:
                sweep({rng.choice(refs)})

    assert sum(counters[o] for o in ("upload", "attach", "detach", "delete", "create", "gc", "read")) == steps
    for op in ("upload", "attach", "detach", "delete", "gc", "read"):
        assert counters[op] > 0, "fuzzer never exercised %s (%s)" % (op, counters)
    assert counters["gc_purged"] > 0, "no GC run ever had anything to collect"


# -- 4: migration fail-safety ---------------------------------------------------


def test_criterion_4_migration_fail_safety(tmp_path):
    """24-document store: a clean run validates 100% at the target schema; one
    corrupt document aborts the run with the store byte-identical; dry-run
    writes nothing."""
    for name in ("clean", "broken", "dry"):
        (tmp_path / name).mkdir()

    store = seed_v1_store(tmp_path / "clean", count=24)
    report = migrate_store(store, 2)
    assert report.ok and len(report.outcomes) == 24
    assert store.schema_version == 2
    for key in store.list_keys():
        tree = parse_tree(store.version_bytes(key, 1))
        result = validate_document(tree, 2)
        assert result.ok, "%s fails schema 2: %s" % (key, result.violations)

    store = seed_v1_store(tmp_path / "broken", count=24)
    victim = store.root / "models" / "model_11" / "v1.xml"
    victim.write_bytes(victim.read_bytes().replace(b"<title>A Surface</title>", b"<title></title>"))
    before = tree_digest(store.root)
    with pytest.raises(MigrationFailed):
        migrate_store(store, 2)
    assert tree_digest(store.root) == before, "failed migration altered the store"
    assert store.schema_version == 1

    store = seed_v1_store(tmp_path / "dry", count=24)
    before = tree_digest(store.root)
    report = migrate_store(store, 2, dry_run=True)
    assert report.ok and report.backup is None
    assert tree_digest(store.root) == before, "dry-run altered the store"
    assert store.schema_version == 1


# -- 5: end-to-end lifecycle over HTTP ----------------------------------------------


def _start_server(app) -> tuple[uvicorn.Server, threading.Thread, str]:
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        assert time.monotonic() < deadline, "server never came up"
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    return server, thread, "http://127.0.0.1:%d" % port


def test_criterion_5_http_lifecycle(tmp_path):
    """Create, edit, upload, submit, send back (inbox), resubmit, approve,
    anonymous permalink, reopen: every step checked on the wire and on disk."""
    store = Store.initialize(tmp_path / "store")
    for name, role in CAST:
        store.add_user(make_user(name, role))
    service = GalleryService(store)
    config = Config(
        data_dir=store.root, listen_addr="127.0.0.1:0", max_upload_bytes=1 << 20, session_ttl_hours=24
    )
    server, thread, base = _start_server(create_app(service, config))
    try:
        with httpx.Client(base_url=base, timeout=10) as http:
            r = http.post("/api/login", data={"user": "owner", "pass": PASSWORD})
            assert r.status_code == 200
            set_cookie = r.headers["set-cookie"]
            assert "HttpOnly" in set_cookie and "Secure" in set_cookie
            token = re.search(r"gallery_session=([^;]+)", set_cookie).group(1)
            author = {"Cookie": "gallery_session=%s" % token}
            reviewer = {
                "Authorization": "Basic " + base64.b64encode(b"reviewer:" + PASSWORD.encode()).decode()
            }

            # create
            r = http.post(
                "/api/models", content=b'<create-model title="Lawson Minimal Surface"/>', headers=author
            )
            assert r.status_code == 201
            key = ET.fromstring(r.content).get("key")
            assert store.load_history(key).latest.status is Status.EDIT

            # edit the description text
            doc = ET.fromstring(http.get("/api/models/%s" % key, headers=author).content)
            doc.find("description/text").text = "A genus-two minimal surface."
            r = http.put("/api/models/%s" % key, content=ET.tostring(doc), headers=author)
            assert r.status_code == 200
            v = store.load_history(key).latest
            assert v.version == 2 and v.status is Status.EDIT

            # upload geometry and a raster render
            obj_bytes = tiny_obj("genus two")
            png_bytes = tiny_png()
            r = http.post(
                "/api/models/%s/media?filename=lawson.obj" % key,
                content=obj_bytes,
                headers=author | {"content-type": "model/obj"},
            )
            assert r.status_code == 201
            obj_blob = ET.fromstring(r.content).get("blob")
            r = http.post(
                "/api/models/%s/media?filename=overview.png" % key,
                content=png_bytes,
                headers=author | {"content-type": "image/png"},
            )
            assert r.status_code == 201
            png_blob = ET.fromstring(r.content).get("blob")
            assert store.blob_exists(obj_blob) and store.blob_exists(png_blob)

            # attach both files as one media object, referenced from the text
            doc = ET.fromstring(http.get("/api/models/%s" % key, headers=author).content)
            doc.find("description/text").text = "A genus-two minimal surface, shown in \\media{overview}."
            mo = ET.SubElement(doc.find("media-objects"), "media-object", {"id": "overview"})
            ET.SubElement(mo, "title").text = "Overview"
            ET.SubElement(mo, "text").text = "Surface mesh with a raster render."
            ET.SubElement(
                mo, "file", {"blob": obj_blob, "name": "lawson.obj", "type": "model/obj", "size": str(len(obj_bytes))}
            )
            ET.SubElement(
                mo, "file", {"blob": png_blob, "name": "overview.png", "type": "image/png", "size": str(len(png_bytes))}
            )
            ET.SubElement(mo, "preview", {"blob": png_blob})
            r = http.put("/api/models/%s" % key, content=ET.tostring(doc), headers=author)
            assert r.status_code == 200
            v = store.load_history(key).latest
            assert v.version == 3 and {obj_blob, png_blob} <= v.blob_ids()

            # submit
            r = http.post("/api/models/%s/submit" % key, headers=author)
            assert r.status_code == 200
            assert store.load_history(key).latest.status is Status.PENDING

            # send back, with review text
            r = http.post(
                "/api/models/%s/review" % key,
                content=b'<review verdict="send_back">'
                b"<review-text>Please describe the conformal structure.</review-text></review>",
                headers=reviewer,
            )
            assert r.status_code == 200
            assert store.load_history(key).latest.status is Status.EDIT

            # the review text is in the author's inbox, on the wire and on disk
            r = http.get("/api/notifications", headers=author)
            assert r.status_code == 200
            notes = [
                n for n in ET.fromstring(r.content).findall("notification") if n.get("event") == "sent_back"
            ]
            assert notes and notes[0].find("review-text").text == "Please describe the conformal structure."
            stored = [n for n in store.notifications_for("owner") if n.event is NotificationEvent.SENT_BACK]
            assert stored and stored[0].review_text == "Please describe the conformal structure."

            # revise and resubmit
            doc = ET.fromstring(http.get("/api/models/%s" % key, headers=author).content)
            doc.find("description/text").text = (
                "A genus-two minimal surface with its conformal structure, shown in \\media{overview}."
            )
            assert http.put("/api/models/%s" % key, content=ET.tostring(doc), headers=author).status_code == 200
            assert store.load_history(key).latest.version == 4
            assert http.post("/api/models/%s/submit" % key, headers=author).status_code == 200
            assert store.load_history(key).latest.status is Status.PENDING

            # approve
            r = http.post(
                "/api/models/%s/review" % key,
                content=b'<review verdict="approve"><review-text>Publishable.</review-text></review>',
                headers=reviewer,
            )
            assert r.status_code == 200
            v = store.load_history(key).latest
            assert v.version == 4 and v.status is Status.APPROVED

            # anonymous permalink serves the approved version, with its license
            r = http.get("/models/%s" % key)
            assert r.status_code == 200
            pub = ET.fromstring(r.content)
            assert pub.get("status") == "approved" and pub.get("version") == "4"
            assert pub.find("license").text == "CC BY-SA 4.0"
            assert "conformal structure" in pub.find("description/text").text

            # reopen and edit; the permalink must not move
            r = http.post("/api/models/%s/reopen" % key, headers=author)
            assert r.status_code == 200
            history = store.load_history(key)
            assert history.latest.version == 5 and history.latest.status is Status.EDIT
            assert history.get_version(4).status is Status.APPROVED
            doc = ET.fromstring(http.get("/api/models/%s" % key, headers=author).content)
            doc.find("description/text").text = "Now under revision, shown in \\media{overview}."
            assert http.put("/api/models/%s" % key, content=ET.tostring(doc), headers=author).status_code == 200
            assert store.load_history(key).latest.version == 6

            r = http.get("/models/%s" % key)
            assert r.status_code == 200
            pub = ET.fromstring(r.content)
            assert pub.get("version") == "4" and pub.get("status") == "approved"
            assert "conformal structure" in pub.find("description/text").text
            assert pub.find("license").text == "CC BY-SA 4.0"
    finally:
        server.should_exit = True
        thread.join(timeout=10)


# -- 6: authentication ------------------------------------------------------------


def test_criterion_6_auth_suite(tmp_path):
    """100 salted verifying hashes, uniform login failures, session expiry,
    a complete credential wall, and unauthenticated fuzz leaving no trace."""
    hashes = {hash_password(PASSWORD) for _ in range(100)}
    assert len(hashes) == 100
    assert all(verify_password(PASSWORD, h) for h in hashes)

    store = Store.initialize(tmp_path / "store")
    for name, role in CAST:
        store.add_user(make_user(name, role))
    service = GalleryService(store)
    config = Config(
        data_dir=store.root, listen_addr="127.0.0.1:0", max_upload_bytes=4096, session_ttl_hours=24
    )
    app = create_app(service, config)
    client = TestClient(app, base_url="https://testserver")

    # login failures are indistinguishable between wrong-password and no-such-user
    wrong = client.post("/api/login", data={"user": "owner", "pass": "not the password"})
    ghost = client.post("/api/login", data={"user": "nobody", "pass": "not the password"})
    assert wrong.status_code == ghost.status_code == 401
    assert wrong.content == ghost.content
    assert ET.fromstring(wrong.content).get("code") == "BAD_CREDENTIALS"

    # expired sessions stop authenticating
    old = service.sessions.create("owner", at=datetime.now(timezone.utc) - timedelta(hours=25))
    expired = TestClient(app, base_url="https://testserver", cookies={"gallery_session": old.token})
    assert expired.get("/api/models").status_code == 401

    # every non-public route turns anonymous callers away
    walled = []
    for route in app.routes:
        path = getattr(route, "path", "")
        if not path.startswith("/api/") or path == "/api/login":
            continue
        concrete = path.format(key="sc-catenoid", number=1, blob_id="0" * 64, notification_id=1)
        for method in route.methods - {"HEAD", "OPTIONS"}:
            r = client.request(method, concrete)
            assert r.status_code == 401, (method, concrete, r.status_code)
            walled.append((method, concrete))
    assert len(walled) >= 14

    # unauthenticated fuzzing does not change a byte on disk
    rng = random.Random(0xC6)
    bodies = (
        b"",
        b'<create-model title="X"/>',
        b'<review verdict="approve"><review-text>x</review-text></review>',
        b'<grant user="admin" role="owner"/>',
        b"\x00\xffgarbage\x13",
    )
    credentials = (
        {},
        {"Authorization": "Basic " + base64.b64encode(b"owner:wrong").decode()},
        {"Cookie": "gallery_session=forged-token"},
    )
    before = tree_digest(store.root)
    attempts = 0
    for method, concrete in walled:
        for creds in credentials:
            r = client.request(method, concrete, content=rng.choice(bodies), headers=creds)
            assert r.status_code == 401
            attempts += 1
    assert attempts >= 42
    assert tree_digest(store.root) == before, "unauthenticated requests changed the store"


# -- 7: parser and serializer ---------------------------------------------------------


def test_criterion_7_parser_round_trips(tmp_path):
    """10,000 rich-text round-trips, pathological inputs included, plus
    byte-stable reserialization of every stored demo document."""
    rng = random.Random(0xC7)
    atoms = (
        "\\cite{",
        "\\media{",
        "\\cite{x}",
        "\\media{fig_1}",
        "\\cite{a:b-c_d}",
        "{",
        "}",
        "\\",
        "}}",
        "\\\\",
        "\\cit",
        "e{k}",
        "a",
        "b9",
        "_",
        ":",
        "-",
        " ",
        "é",
        "\n",
    )
    for i in range(10_000):
        if i % 2 == 0:
            s = "".join(rng.choice(atoms) for _ in range(rng.randrange(0, 24)))
        else:
            s = "".join(
                chr(rng.choice((92, 123, 125)) if rng.random() < 0.4 else rng.randrange(32, 0x300))
                for _ in range(rng.randrange(0, 40))
            )
        assert serialize_rich_text(parse_rich_text(s)) == s, "round-trip changed %r" % s

    store = Store.initialize(tmp_path / "store")
    seed_store(store)
    checked = 0
    for key in FIXTURE_KEYS:
        history = store.load_history(key)
        for v in history.versions:
            raw = store.version_bytes(key, v.version)
            once = serialize_version(parse_version(raw))
            assert once == raw, "reserializing %s/v%d changed bytes" % (key, v.version)
            assert serialize_version(parse_version(once)) == once
            checked += 1
    assert checked >= 5
