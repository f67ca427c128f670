"""Values that live in form fields, and the structural equality over them.

A Value is a string, number, boolean, null, list, association or Form. Two
raw wrappers sit beside them: ``Expression`` holds expression text kept
unevaluated until a machine runs, and ``QuoteTemplate`` holds a quote block
that still contains splice marks.
"""
import math
import re
import sys
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

# Handle imports for both module and direct execution
try:
    from .errors import EvalError
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import EvalError

IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# Names may also carry hyphens ("self-improving"); dots would break paths.
NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")


@dataclass(frozen=True)
class Expression:
    """Raw expression text, stored exactly as the author wrote it."""

    source: str

    def __str__(self) -> str:
        return self.source


@dataclass(frozen=True)
class QuoteTemplate:
    """A quote block with splice marks, kept as dedented source text."""

    source: str

    def __str__(self) -> str:
        return self.source


class _Absent:
    """Marker returned by navigation when a path resolves to nothing."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "ABSENT"


ABSENT = _Absent()


def is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def is_scalar(value: Any) -> bool:
    return value is None or isinstance(value, (str, bool)) or is_number(value)


def format_number(value: Union[int, float]) -> str:
    """Shortest decimal text that reads back as the same number."""
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise EvalError(f"not a finite number: {value!r}", code="type-mismatch")
        return repr(value)
    return str(value)


def values_equal(left: Any, right: Any) -> bool:
    """Structural equality: booleans are never numbers, lists compare
    element-wise whatever their container, associations ignore key order."""
    if isinstance(left, bool) or isinstance(right, bool):
        return isinstance(left, bool) and isinstance(right, bool) and left == right
    if is_number(left) or is_number(right):
        return is_number(left) and is_number(right) and left == right
    if left is None or right is None:
        return left is None and right is None
    if isinstance(left, str) or isinstance(right, str):
        return isinstance(left, str) and isinstance(right, str) and left == right
    if isinstance(left, Mapping) or isinstance(right, Mapping):
        if not (isinstance(left, Mapping) and isinstance(right, Mapping)):
            return False
        if set(left.keys()) != set(right.keys()):
            return False
        return all(values_equal(left[key], right[key]) for key in left)
    if isinstance(left, (list, tuple)) or isinstance(right, (list, tuple)):
        if not (isinstance(left, (list, tuple)) and isinstance(right, (list, tuple))):
            return False
        return len(left) == len(right) and all(
            values_equal(a, b) for a, b in zip(left, right)
        )
    return type(left) is type(right) and left == right


def type_word(value: Any) -> str:
    """Name of a value's type as it appears in error messages."""
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if is_number(value):
        return "number"
    if isinstance(value, str):
        return "text"
    if isinstance(value, Mapping):
        return "association"
    if isinstance(value, (list, tuple)):
        return "list"
    if isinstance(value, Expression):
        return "expression"
    if isinstance(value, QuoteTemplate):
        return "quote"
    return getattr(value, "TYPE_WORD", type(value).__name__)
