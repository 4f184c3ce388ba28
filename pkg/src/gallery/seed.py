"""Demonstration fixtures: five published geometry models with tiny
placeholder data files, plus the accounts that own and review them.

Each model is created in EDIT state, submitted by its owner, and approved by
the reviewer account, so a seeded store carries a genuine audit trail and
realistic notifications instead of hand-written state.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

from .auth import GlobalRole, User, hash_password
from .core import (
    DEFAULT_LICENSE,
    AuthorRef,
    Description,
    FileRef,
    MediaObject,
    ModelHistory,
    ModelVersion,
    Reference,
    Status,
    now_utc,
)
from .storage import Store
from .workflow import GalleryService, Verdict, VerdictKind

DEFAULT_SEED_PASSWORD = "gallery-demo"

FIXTURE_KEYS = (
    "sc-catenoid",
    "zalpha_circle_pattern",
    "koebe_polyhedra",
    "lawsons_surface_uniformization",
    "tropical_grassmannian_gr26",
)


def tiny_png() -> bytes:
    """A complete, valid 1x1 transparent PNG."""

    def chunk(tag: bytes, data: bytes) -> bytes:
        return (
            struct.pack(">I", len(data))
            + tag
            + data
            + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)
        )

    ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 6, 0, 0, 0)
    idat = zlib.compress(b"\x00\x00\x00\x00\x00")
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")


def tiny_obj(comment: str) -> bytes:
    """A minimal wavefront OBJ: one quadrilateral face."""
    return ("# %s\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n" % comment).encode("utf-8")


def tiny_pdf(title: str) -> bytes:
    return (
        "%%PDF-1.1\n"
        "1 0 obj<</Type/Catalog/Pages 2 0 R>>endobj\n"
        "2 0 obj<</Type/Pages/Kids[3 0 R]/Count 1>>endobj\n"
        "3 0 obj<</Type/Page/Parent 2 0 R/MediaBox[0 0 200 200]>>endobj\n"
        "%%%% %s\n"
        "trailer<</Root 1 0 R>>\n"
        "%%%%EOF\n" % title
    ).encode("utf-8")


def tiny_mp4() -> bytes:
    return b"\x00\x00\x00\x18ftypisom\x00\x00\x02\x00isomiso2" + b"\x00" * 16


def tiny_xml(payload: str) -> bytes:
    return ('<?xml version="1.0" encoding="UTF-8"?>\n%s\n' % payload).encode("utf-8")


@dataclass(frozen=True)
class _SeedFile:
    name: str
    media_type: str
    data: bytes


@dataclass(frozen=True)
class _SeedMedia:
    media_id: str
    title: str
    text: str
    files: tuple[_SeedFile, ...]
    preview: bytes | None = None


@dataclass(frozen=True)
class _SeedModel:
    key: str
    title: str
    owner: str
    authors: tuple[str, ...]
    text: str
    keywords: frozenset[str]
    references: tuple[Reference, ...]
    media: tuple[_SeedMedia, ...]


def _ref(key: str, entry_type: str, **attrs: str) -> Reference:
    return Reference(ref_key=key, entry_type=entry_type, attributes=tuple(sorted(attrs.items())))


_PNG = tiny_png()

_MODELS = (
    _SeedModel(
        key="sc-catenoid",
        title="Discrete S-Conical Catenoid and Helicoid",
        owner="sechelmann",
        authors=("Alexander I. Bobenko", "Tim Hoffmann", "Benno König", "Stefan Sechelmann"),
        text=(
            "This model shows discrete s-conical versions of the catenoid and the helicoid, "
            "which are classical minimal surfaces \\cite{BHKS15}. Their s-conical counterparts "
            "are quadrilateral polyhedral surfaces such that at each vertex the adjacent faces "
            "are tangent to a cone of revolution. A minimal surface is dual to its Gauss map; "
            "this property is preserved in the discrete setup, so discrete minimal surfaces are "
            "constructed from Koebe polyhedra. See \\media{catenoid} for the catenoid geometry "
            "and \\media{associate-family} for an animation of the associate family between the "
            "catenoid and its conjugate, the discrete helicoid."
        ),
        keywords=frozenset({"minimal surface", "catenoid", "helicoid", "s-conical", "discrete differential geometry"}),
        references=(
            _ref(
                "BHKS15",
                "article",
                author="A. I. Bobenko and T. Hoffmann and B. König and S. Sechelmann",
                title="S-conical minimal surfaces. Towards a unified theory of discrete minimal surfaces",
                year="2015",
            ),
        ),
        media=(
            _SeedMedia(
                media_id="catenoid",
                title="Discrete s-conical catenoid",
                text="Catenoid with discrete curvature line parameterization.",
                files=(
                    _SeedFile("catenoid.obj", "model/obj", tiny_obj("s-conical catenoid")),
                    _SeedFile("catenoid.png", "image/png", _PNG),
                ),
                preview=_PNG,
            ),
            _SeedMedia(
                media_id="associate-family",
                title="Associate family animation",
                text="Animation of the associate family between catenoid and helicoid.",
                files=(_SeedFile("associate_family.mp4", "video/mp4", tiny_mp4()),),
                preview=_PNG,
            ),
        ),
    ),
    _SeedModel(
        key="zalpha_circle_pattern",
        title="z^a Circle Pattern",
        owner="techter",
        authors=("Jan Techter", "Jürgen Richter-Gebert"),
        text=(
            "The representation of discrete holomorphic functions by circle patterns with "
            "square-grid combinatorics was first studied by Schramm \\cite{S97}. This model "
            "shows the Schramm type circle pattern corresponding to the holomorphic map z to "
            "z^a for 0 < a < 2 in the first quadrant of the complex plane. Taking the centers "
            "and intersections of the circles as complex fields, the discrete map was "
            "introduced in \\cite{B99} as an isomonodromic solution of the cross-ratio "
            "equation. See \\media{pattern} for a rendering of the pattern."
        ),
        keywords=frozenset({"circle patterns", "discrete holomorphic functions", "cross-ratio equation"}),
        references=(
            _ref(
                "S97",
                "article",
                author="O. Schramm",
                title="Circle patterns with the combinatorics of the square grid",
                journal="Duke Math. J.",
                year="1997",
            ),
            _ref(
                "B99",
                "incollection",
                author="A. I. Bobenko",
                title="Discrete conformal maps and surfaces",
                booktitle="Symmetries and Integrability of Difference Equations",
                publisher="Cambridge Univ. Press",
                year="1999",
            ),
        ),
        media=(
            _SeedMedia(
                media_id="pattern",
                title="Circle pattern for z^a",
                text="Circle pattern in the first quadrant with adjustable exponent.",
                files=(_SeedFile("zalpha_pattern.png", "image/png", _PNG),),
                preview=_PNG,
            ),
        ),
    ),
    _SeedModel(
        key="koebe_polyhedra",
        title="Koebe Polyhedra",
        owner="sechelmann",
        authors=("Stefan Sechelmann",),
        text=(
            "A Koebe polyhedron is a 3-dimensional convex polytope whose edges are tangent to "
            "the unit sphere. Koebe polyhedra have a strong connection to the theory of circle "
            "patterns \\cite{Bobenko04}. Each combinatorial type of 3-polytope admits a "
            "representation as a Koebe polyhedron, unique up to Möbius transformation. The "
            "construction starts from an orthogonal circle pattern; one family of circles "
            "becomes vertices, the orthogonal family becomes faces. Compare \\media{vertices} "
            "and \\media{faces} for the two polyhedra arising from one circle pattern."
        ),
        keywords=frozenset({"Koebe polyhedron", "circle patterns", "convex polytopes"}),
        references=(
            _ref(
                "Bobenko04",
                "article",
                author="A. I. Bobenko and B. A. Springborn",
                title="Variational principles for circle patterns and Koebe's theorem",
                journal="Trans. Amer. Math. Soc.",
                volume="356",
                year="2004",
            ),
        ),
        media=(
            _SeedMedia(
                media_id="vertices",
                title="Koebe polyhedron, vertex family",
                text="The circle family chosen as vertices.",
                files=(
                    _SeedFile("koebe_vertices.obj", "model/obj", tiny_obj("koebe polyhedron, vertex family")),
                    _SeedFile("koebe_vertices.png", "image/png", _PNG),
                ),
                preview=_PNG,
            ),
            _SeedMedia(
                media_id="faces",
                title="Koebe polyhedron, face family",
                text="The orthogonal circle family chosen as faces.",
                files=(
                    _SeedFile("koebe_faces.obj", "model/obj", tiny_obj("koebe polyhedron, face family")),
                    _SeedFile("koebe_faces.png", "image/png", _PNG),
                ),
                preview=_PNG,
            ),
        ),
    ),
    _SeedModel(
        key="lawsons_surface_uniformization",
        title="Lawson's Surface Uniformization",
        owner="sechelmann",
        authors=("Stefan Sechelmann", "Alexander I. Bobenko", "Boris Springborn"),
        text=(
            "Fuchsian uniformizations of the Riemann surface of Lawson's genus 2 minimal "
            "surface \\cite{Law1970} are presented in this model. Lawson's minimal surface is "
            "conformally equivalent to the hyperelliptic curve mu^2 = lambda^6 - 1, whose "
            "branch points are the 6th roots of unity. An embedding in R^3 is obtained via "
            "stereographic projection; see \\media{embedding}. The uniformization in the "
            "Poincaré disk with a canonical fundamental domain is shown in \\media{fuchsian}, "
            "and the full combinatorial and group data accompanies the images in "
            "\\media{uniformization-data}."
        ),
        keywords=frozenset({"uniformization", "Riemann surface", "Lawson surface", "hyperbolic geometry"}),
        references=(
            _ref(
                "Law1970",
                "article",
                author="H. B. Lawson",
                title="Complete minimal surfaces in S3",
                journal="Ann. of Math.",
                volume="92",
                pages="335-374",
                year="1970",
            ),
        ),
        media=(
            _SeedMedia(
                media_id="embedding",
                title="Lawson surface in R3",
                text="Embedding with boundary curves of the fundamental domain in red.",
                files=(
                    _SeedFile("lawson_r3.png", "image/png", _PNG),
                    _SeedFile("lawson_r3.pdf", "application/pdf", tiny_pdf("Lawson surface in R3")),
                ),
                preview=_PNG,
            ),
            _SeedMedia(
                media_id="fuchsian",
                title="Fuchsian uniformization",
                text="Canonical fundamental domain and axes of the hyperbolic generators.",
                files=(
                    _SeedFile("lawson_fuchsian.png", "image/png", _PNG),
                    _SeedFile("lawson_fuchsian.pdf", "application/pdf", tiny_pdf("Fuchsian uniformization")),
                ),
                preview=_PNG,
            ),
            _SeedMedia(
                media_id="uniformization-data",
                title="Uniformization data",
                text="Combinatorics, point coordinates, and uniformizing group data.",
                files=(
                    _SeedFile(
                        "lawson_uniformization.xml",
                        "application/xml",
                        tiny_xml('<uniformization genus="2" curve="mu^2=lambda^6-1"/>'),
                    ),
                ),
            ),
        ),
    ),
    _SeedModel(
        key="tropical_grassmannian_gr26",
        title="Tropical Grassmannian TropGr(2,6)",
        owner="joswig",
        authors=("Michael Joswig", "Benjamin Schröter"),
        text=(
            "Tropical geometry studies piecewise linear images of classical algebraic "
            "varieties. The tropical Grassmannian TropGr(d,n) is the tropicalization of the "
            "classical Grassmannian \\cite{TropicalBook}; for d = 2 it coincides with the "
            "corresponding Dressian \\cite{HJJS2009}. Modulo its lineality space and "
            "intersected with the unit sphere, TropGr(2,6) is a 2-dimensional spherical "
            "simplicial complex with 25 vertices, 105 edges, and 105 triangles, naturally "
            "embedded in the 8-sphere. The visualization in \\media{projection} uses a fixed "
            "copy of TropGr(2,5), obtained by deletion, as a frame of reference."
        ),
        keywords=frozenset({"tropical geometry", "Grassmannian", "matroid decompositions"}),
        references=(
            _ref(
                "TropicalBook",
                "book",
                author="D. Maclagan and B. Sturmfels",
                title="Introduction to Tropical Geometry",
                publisher="American Mathematical Society",
                year="2015",
            ),
            _ref(
                "HJJS2009",
                "article",
                author="S. Herrmann and A. N. Jensen and M. Joswig and B. Sturmfels",
                title="How to draw tropical planes",
                journal="Electron. J. Combin.",
                volume="16",
                year="2009",
            ),
        ),
        media=(
            _SeedMedia(
                media_id="projection",
                title="Projection of TropGr(2,6)",
                text="Projection with TropGr(2,5) as frame of reference.",
                files=(_SeedFile("tropgr26_projection.png", "image/png", _PNG),),
                preview=_PNG,
            ),
            _SeedMedia(
                media_id="rays",
                title="Rays and lineality space",
                text="The rays of the fan modulo lineality.",
                files=(_SeedFile("tropgr26_rays.png", "image/png", _PNG),),
                preview=_PNG,
            ),
        ),
    ),
)

_USERS = (
    ("admin", "Administrator", "admin@example.org", GlobalRole.ADMIN),
    ("reviewer", "Review Board", "reviewer@example.org", GlobalRole.REVIEWER),
    ("sechelmann", "Stefan Sechelmann", "sechelmann@example.org", GlobalRole.AUTHOR),
    ("techter", "Jan Techter", "techter@example.org", GlobalRole.AUTHOR),
    ("joswig", "Michael Joswig", "joswig@example.org", GlobalRole.AUTHOR),
)


def seed_store(store: Store, password: str = DEFAULT_SEED_PASSWORD) -> list[str]:
    """Install the demo users and the five approved fixture models.

    Returns the created model keys.  Fails with DUPLICATE_KEY if any fixture
    user or model already exists.
    """
    service = GalleryService(store)
    for username, display, email, role in _USERS:
        store.add_user(
            User(
                username=username,
                display_name=display,
                email=email,
                global_role=role,
                password_hash=hash_password(password),
            )
        )

    created = []
    for spec in _MODELS:
        media = []
        for m in spec.media:
            files = tuple(
                FileRef(
                    blob_id=store.put_blob(f.data),
                    filename=f.name,
                    media_type=f.media_type,
                    size_bytes=len(f.data),
                )
                for f in m.files
            )
            preview = store.put_blob(m.preview) if m.preview is not None else None
            media.append(
                MediaObject(media_id=m.media_id, title=m.title, text=m.text, files=files, preview=preview)
            )
        description = Description(
            title=spec.title,
            authors=tuple(AuthorRef(name=name, position=i) for i, name in enumerate(spec.authors)),
            text=spec.text,
            keywords=spec.keywords,
            references=spec.references,
        )
        v1 = ModelVersion(
            key=spec.key,
            version=1,
            status=Status.EDIT,
            edited_by=spec.owner,
            schema_version=store.schema_version,
            description=description,
            media=tuple(media),
            created_at=now_utc(),
            license=DEFAULT_LICENSE if store.schema_version >= 2 else None,
        )
        store.create_history(ModelHistory(key=spec.key, versions=(v1,), owners=frozenset({spec.owner})))
        owner = store.get_user(spec.owner)
        reviewer = store.get_user("reviewer")
        service.submit(owner, spec.key)
        service.review(
            reviewer,
            spec.key,
            Verdict(VerdictKind.APPROVE, "Formally correct and technically sound; approved for publication."),
        )
        created.append(spec.key)
    return created
