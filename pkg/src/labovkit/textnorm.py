"""Text normalization shared by parsers, segmentation metrics, and lints.

Every string that enters the data model goes through :func:`normalize_text`
so that segmentation atoms (characters) are identical no matter which
annotator or tool produced the file.
"""

from __future__ import annotations

import hashlib
import unicodedata

_BOM = "﻿"


def normalize_text(text: str) -> str:
    """Return the canonical form of a transcript string.

    Applies NFC normalization, removes byte-order marks, and collapses
    every whitespace run (spaces, tabs, newlines) to a single space,
    stripping leading and trailing whitespace.
    """
    text = text.replace(_BOM, "")
    text = unicodedata.normalize("NFC", text)
    return " ".join(text.split())


def text_digest(text: str) -> str:
    """SHA-256 hex digest of a normalized transcript string."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
