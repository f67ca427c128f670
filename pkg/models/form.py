"""The Form value: an immutable tree describing a machine's structure.

A form is ``(kind, name, variant, content, fields, children)``. Forms are data
only; nothing in this module can run one. Navigation and analysis live here
as methods, transformations in :mod:`models.transform` and structural diffs
in :mod:`models.form_diff`.

Paths are dotted strings. Each segment picks, in order: the first child with
that name, the first unnamed child of that kind, the child at a ``#k`` index,
a field key, and on the last segment only an attribute terminal
(``name``, ``variant_key``, ``variant_value``, ``content``, ``kind``).
"""
import math
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Iterator, Optional, Union
import sys
from pathlib import Path

try:
    from .capability import CapabilityAtom
    from .errors import FormError
    from .kind import ASK_FROM, ASK_USING, Kind, is_legal_child
    from .values import (
        ABSENT, IDENTIFIER_RE, NAME_RE, Expression, QuoteTemplate, is_number,
        is_scalar, values_equal,
    )
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.capability import CapabilityAtom
    from models.errors import FormError
    from models.kind import ASK_FROM, ASK_USING, Kind, is_legal_child
    from models.values import (
        ABSENT, IDENTIFIER_RE, NAME_RE, Expression, QuoteTemplate, is_number,
        is_scalar, values_equal,
    )


ATTRIBUTES = ("name", "variant_key", "variant_value", "content", "kind")

ROOT_PATH = ""


@dataclass(frozen=True)
class Violation:
    """One broken structural rule, located by path ("" is the root)."""

    path: str
    rule: str

    def __str__(self) -> str:
        return f"{self.path or '(root)'}: {self.rule}"


@dataclass(frozen=True, eq=False)
class Form:
    """An immutable program structure. Every transformation returns a new form.

    Construction checks types and freezes field values; the legality table
    and naming rules are reported by :meth:`validate`, so malformed trees can
    still be built, hashed and inspected.
    """

    TYPE_WORD = "form"

    kind: Kind
    name: Optional[str] = None
    variant: Optional[tuple] = None
    content: Optional[str] = None
    fields: tuple = ()
    children: tuple = ()

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            raise FormError(f"not a form kind: {self.kind!r}", code="invalid-kind")
        if self.name is not None and not isinstance(self.name, str):
            raise FormError(f"name must be text: {self.name!r}", code="invalid-value")
        if self.content is not None and not isinstance(self.content, str):
            raise FormError("content must be text", code="invalid-value")

        if self.variant is not None:
            if len(self.variant) != 2 or not isinstance(self.variant[0], str):
                raise FormError(f"malformed variant: {self.variant!r}", code="invalid-value")
            if not is_scalar(self.variant[1]):
                raise FormError("variant value must be a scalar", code="invalid-value")
            object.__setattr__(self, "variant", (self.variant[0], freeze_value(self.variant[1])))

        pairs = self.fields.items() if isinstance(self.fields, Mapping) else self.fields
        frozen = []
        seen = set()
        for key, value in pairs:
            if not isinstance(key, str):
                raise FormError(f"field key must be text: {key!r}", code="invalid-value")
            if key in seen:
                raise FormError(f"duplicate field key: {key}", code="duplicate-field")
            seen.add(key)
            frozen.append((key, freeze_value(value)))
        object.__setattr__(self, "fields", tuple(frozen))

        children = tuple(self.children)
        for child in children:
            if not isinstance(child, Form):
                raise FormError(f"child is not a form: {child!r}", code="invalid-value")
        object.__setattr__(self, "children", children)

    # ------------------------------------------------------------------
    # Construction and equality
    # ------------------------------------------------------------------

    @classmethod
    def new(cls, kind: Union[Kind, str], name: Optional[str] = None) -> "Form":
        """An empty form of ``kind``; machines and steps must be named."""
        return cls(kind=coerce_kind(kind), name=checked_name(coerce_kind(kind), name))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        if self is other:
            return True
        return (
            self.kind is other.kind
            and self.name == other.name
            and self.content == other.content
            and _variants_equal(self.variant, other.variant)
            and len(self.fields) == len(other.fields)
            and all(
                k1 == k2 and values_equal(v1, v2)
                for (k1, v1), (k2, v2) in zip(self.fields, other.fields)
            )
            and self.children == other.children
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.name, self.content, len(self.children)))

    # ------------------------------------------------------------------
    # Attributes and fields
    # ------------------------------------------------------------------

    @property
    def variant_key(self) -> Optional[str]:
        return self.variant[0] if self.variant else None

    @property
    def variant_value(self) -> Any:
        return self.variant[1] if self.variant else None

    def field(self, key: str) -> Any:
        for field_key, value in self.fields:
            if field_key == key:
                return value
        return ABSENT

    def has_field(self, key: str) -> bool:
        return any(field_key == key for field_key, _ in self.fields)

    def attribute(self, name: str) -> Any:
        if name == "kind":
            return self.kind.value
        if name in ("variant_key", "variant_value"):
            return ABSENT if self.variant is None else getattr(self, name)
        value = getattr(self, name)
        return ABSENT if value is None else value

    # ------------------------------------------------------------------
    # Navigation
    # ------------------------------------------------------------------

    def child_segment(self, index: int) -> str:
        """The path segment that resolves back to ``children[index]``."""
        child = self.children[index]
        if child.name is not None and self.resolve_child(child.name) == index:
            return child.name
        if child.name is None and self.resolve_child(child.kind.value) == index:
            return child.kind.value
        return f"#{index}"

    def resolve_child(self, segment: str) -> Optional[int]:
        for index, child in enumerate(self.children):
            if child.name == segment:
                return index
        for index, child in enumerate(self.children):
            if child.name is None and child.kind.value == segment:
                return index
        if segment.startswith("#") and segment[1:].isdigit():
            index = int(segment[1:])
            if index < len(self.children):
                return index
        return None

    def get(self, path: str) -> Any:
        """The value at ``path``, or ``ABSENT``; only a malformed path raises."""
        segments = split_path(path)
        node: Any = self
        for position, segment in enumerate(segments):
            last = position == len(segments) - 1
            if not isinstance(node, Form):
                if isinstance(node, Mapping) and segment in node:
                    node = node[segment]
                    continue
                return ABSENT
            index = node.resolve_child(segment)
            if index is not None:
                node = node.children[index]
            elif node.has_field(segment):
                node = node.field(segment)
            elif last and segment in ATTRIBUTES:
                return node.attribute(segment)
            else:
                return ABSENT
        return node

    def section(self, verb: Union[Kind, str]) -> Optional["Form"]:
        kind = coerce_kind(verb)
        return next((child for child in self.children if child.kind is kind), None)

    def step(self, name: str) -> Optional["Form"]:
        return next((step for step in self.steps() if step.name == name), None)

    def steps(self) -> list["Form"]:
        """Step forms under the implements section(s), in declaration order."""
        return [
            step
            for section in self.children
            if section.kind is Kind.IMPLEMENTS
            for step in section.children
            if step.kind.is_step
        ]

    def count_steps(self) -> int:
        return len(self.steps())

    def step_types(self) -> Counter:
        return Counter(step.kind for step in self.steps())

    def walk(self, prefix: str = ROOT_PATH) -> Iterator[tuple[str, "Form"]]:
        """Every form in the child tree, pre-order, with its path."""
        yield prefix, self
        for index, child in enumerate(self.children):
            yield from child.walk(join_path(prefix, self.child_segment(index)))

    def find_all(self, kind: Union[Kind, str]) -> list["Form"]:
        wanted = coerce_kind(kind)
        return [form for _, form in self.walk() if form.kind is wanted]

    # ------------------------------------------------------------------
    # Analysis
    # ------------------------------------------------------------------

    def capabilities(self) -> frozenset:
        """CapSet: one atom per ask step; compute steps contribute nothing."""
        atoms = set()
        for path, form in self.walk():
            if form.kind is Kind.ASK:
                atom = ask_capability(form)
                if atom is None:
                    raise FormError(
                        f"ask step at {path} has no using/from target",
                        code="malformed-ask",
                    )
                atoms.add(atom)
        return frozenset(atoms)

    def validate(self, require_machine_root: bool = True) -> list[Violation]:
        violations: list[Violation] = []
        if require_machine_root and self.kind is not Kind.MACHINE:
            violations.append(Violation(ROOT_PATH, "root-must-be-machine"))
        self._collect_violations(ROOT_PATH, violations)
        return violations

    def _collect_violations(self, path: str, out: list[Violation]) -> None:
        if self.kind.requires_name and not self.name:
            out.append(Violation(path, "missing-required-name"))
        elif self.name is not None and not NAME_RE.match(self.name):
            out.append(Violation(path, "invalid-name"))

        if self.kind is Kind.ASK and ask_capability(self) is None:
            out.append(Violation(path, "malformed-ask"))

        for key, value in self.fields:
            field_path = join_path(path, key)
            if not IDENTIFIER_RE.match(key):
                out.append(Violation(field_path, "invalid-field-key"))
            if isinstance(value, Form):
                value._collect_violations(field_path, out)

        seen_names = set()
        for index, child in enumerate(self.children):
            child_path = join_path(path, self.child_segment(index))
            if not is_legal_child(self.kind, child.kind):
                out.append(Violation(child_path, "illegal-child-kind"))
            if child.name is not None:
                if child.name in seen_names:
                    out.append(Violation(child_path, "duplicate-name"))
                seen_names.add(child.name)
            child._collect_violations(child_path, out)


# ----------------------------------------------------------------------
# Helpers shared by the form modules
# ----------------------------------------------------------------------


def coerce_kind(kind: Union[Kind, str]) -> Kind:
    if isinstance(kind, Kind):
        return kind
    resolved = Kind.parse(kind) if isinstance(kind, str) else None
    if resolved is None:
        raise FormError(f"unknown kind: {kind!r}", code="invalid-kind")
    return resolved


def checked_name(kind: Kind, name: Optional[str]) -> Optional[str]:
    """``name`` when it is legal for ``kind``; raise missing-required-name or invalid-name."""
    if kind.requires_name and not name:
        raise FormError(f"{kind.value} forms need a name", code="missing-required-name")
    if name is not None and not NAME_RE.match(name):
        raise FormError(f"not a valid name: {name!r}", code="invalid-name")
    return name


def _variants_equal(left, right) -> bool:
    if left is None or right is None:
        return left is None and right is None
    return left[0] == right[0] and values_equal(left[1], right[1])


def ask_capability(form: Form) -> Optional[CapabilityAtom]:
    """The atom an ask step needs, or None when its variant is malformed."""
    if form.variant is None:
        return None
    key, target = form.variant
    if not isinstance(target, str) or not target:
        return None
    if key == ASK_USING:
        return CapabilityAtom.model(target)
    if key == ASK_FROM:
        return CapabilityAtom.call(target)
    return None


def split_path(path: str) -> list[str]:
    if not isinstance(path, str) or path == "":
        raise FormError("path must be non-empty", code="malformed-path")
    segments = path.split(".")
    if any(segment == "" for segment in segments):
        raise FormError(f"empty segment in path {path!r}", code="malformed-path")
    return segments


def join_path(prefix: str, segment: str) -> str:
    return f"{prefix}.{segment}" if prefix else segment


def parent_path(path: str) -> tuple[str, str]:
    """Split ``a.b.c`` into (``a.b``, ``c``); the root parent is ""."""
    head, _, last = path.rpartition(".")
    return head, last


def freeze_value(value: Any) -> Any:
    """Make a Value immutable: lists become tuples, associations read-only."""
    if value is None or isinstance(value, (str, bool, Form, Expression, QuoteTemplate)):
        return value
    if is_number(value):
        if isinstance(value, float) and not math.isfinite(value):
            raise FormError(f"not a finite number: {value!r}", code="invalid-value")
        return value
    if isinstance(value, Mapping):
        frozen = {}
        for key, item in value.items():
            if not isinstance(key, str):
                raise FormError(f"association keys must be text: {key!r}", code="invalid-value")
            frozen[key] = freeze_value(item)
        return MappingProxyType(frozen)
    if isinstance(value, (list, tuple)):
        return tuple(freeze_value(item) for item in value)
    raise FormError(f"not a form value: {value!r}", code="invalid-value")


def thaw_value(value: Any) -> Any:
    """Mutable copy of a frozen Value, for handing to evaluation results."""
    if isinstance(value, Mapping):
        return {key: thaw_value(item) for key, item in value.items()}
    if isinstance(value, tuple):
        return [thaw_value(item) for item in value]
    return value
