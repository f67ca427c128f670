"""Filenames for forms stored in the persisted registry.

Stored form files are named ``<Name>_<hash12>.mt``. The stem is restricted to
``A-Z``, ``a-z``, ``0-9`` and ``_`` so it survives any filesystem, shell, or
sync tool without quoting; the hash prefix keeps versions of one machine
apart.
"""
import re
import unicodedata
from typing import Optional


# Longest permitted stem, before the hash suffix.
FILENAME_MAX_LENGTH = 120

FALLBACK_FILENAME = "unnamed"

FORM_EXTENSION = ".mt"

HASH_PREFIX_LENGTH = 12

_SEPARATOR_RE = re.compile(r"[^A-Za-z0-9]+")
_HEX_RE = re.compile(r"^[0-9a-f]{64}$")


def safe_filename(name: Optional[str]) -> str:
    """Return a filename stem containing only ``[A-Za-z0-9_]``.

    Accented letters are decomposed to their base form so they survive as
    ASCII. Every other run of non-alphanumeric characters becomes a single
    underscore: "self-improving" becomes ``Self_Improving``.
    """
    if not name:
        return FALLBACK_FILENAME

    decomposed = unicodedata.normalize("NFKD", name)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    underscored = _SEPARATOR_RE.sub("_", stripped).strip("_")

    if not underscored:
        return FALLBACK_FILENAME

    titled = "_".join(_title_word(word) for word in underscored.split("_"))
    capped = titled[:FILENAME_MAX_LENGTH].rstrip("_")
    return capped or FALLBACK_FILENAME


def form_filename(name: Optional[str], form_hash: str, extension: str = FORM_EXTENSION) -> str:
    """``greeter`` + digest -> ``Greeter_1a2b3c4d5e6f.mt``."""
    if not _HEX_RE.match(form_hash):
        raise ValueError(f"not a form hash: {form_hash!r}")
    return f"{safe_filename(name)}_{form_hash[:HASH_PREFIX_LENGTH]}{extension}"


def _title_word(word: str) -> str:
    return word[:1].upper() + word[1:].lower()
