"""Versioned gallery service for digital research data.

Models live as immutable version chains under an editorial workflow
(edit, pending, approved, rejected), with role-based access control,
content-addressed media storage, schema-versioned XML documents, and a
REST interface.
"""

from .core import CURRENT_SCHEMA
from .errors import GalleryError
from .storage import Store
from .workflow import GalleryService, Verdict, VerdictKind

__all__ = [
    "CURRENT_SCHEMA",
    "GalleryError",
    "GalleryService",
    "Store",
    "Verdict",
    "VerdictKind",
]
