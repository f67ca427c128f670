"""Structural diff between two forms, and its application.

Children pair up the way :func:`models.transform.merge` pairs them. Entries
are ordered so they can be applied one after another: attributes, fields,
matched children, removals (last first), then additions. When a reordering
makes a fine-grained patch ambiguous the whole subtree is replaced by one
``modified`` entry with target ``form``.
"""
import sys
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterator, Optional

try:
    from .errors import FormError
    from .form import Form, join_path, parent_path
    from .transform import match_key, update_at
    from .values import values_equal
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import FormError
    from models.form import Form, join_path, parent_path
    from models.transform import match_key, update_at
    from models.values import values_equal


ADDED = "added"
REMOVED = "removed"
MODIFIED = "modified"

OPS = (ADDED, REMOVED, MODIFIED)
TARGETS = ("attribute", "field", "child", "form")


@dataclass(frozen=True)
class DiffEntry:
    path: str
    op: str
    before: Any = None
    after: Any = None
    target: str = "field"

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown diff op: {self.op!r}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown diff target: {self.target!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffEntry):
            return NotImplemented
        return (
            (self.path, self.op, self.target) == (other.path, other.op, other.target)
            and values_equal(self.before, other.before)
            and values_equal(self.after, other.after)
        )

    def __hash__(self) -> int:
        return hash((self.path, self.op, self.target))


@dataclass(frozen=True)
class FormDiff:
    entries: tuple = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[DiffEntry]:
        return iter(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def paths(self) -> list[str]:
        return [entry.path for entry in self.entries]

    def ops(self) -> Counter:
        return Counter(entry.op for entry in self.entries)


EMPTY_DIFF = FormDiff()


def diff(a: Form, b: Form) -> FormDiff:
    entries: list[DiffEntry] = []
    _diff_node(a, b, "", entries)
    return FormDiff(tuple(entries))


def _diff_node(a: Form, b: Form, path: str, out: list[DiffEntry]) -> None:
    if a == b:
        return
    if a.kind is not b.kind or (a.variant is None) != (b.variant is None):
        out.append(DiffEntry(path, MODIFIED, a, b, "form"))
        return
    pairs = _child_pairs(a, b)
    if not _fields_patchable(a, b) or pairs is None:
        out.append(DiffEntry(path, MODIFIED, a, b, "form"))
        return

    for attribute, before, after in (
        ("name", a.name, b.name),
        ("content", a.content, b.content),
    ):
        if before != after:
            out.append(DiffEntry(join_path(path, attribute), _op(before, after), before, after, "attribute"))
    if a.variant is not None:
        if a.variant_key != b.variant_key:
            out.append(DiffEntry(join_path(path, "variant_key"), MODIFIED, a.variant_key, b.variant_key, "attribute"))
        if not values_equal(a.variant_value, b.variant_value):
            out.append(DiffEntry(join_path(path, "variant_value"), MODIFIED, a.variant_value, b.variant_value, "attribute"))

    before_fields = dict(a.fields)
    after_fields = dict(b.fields)
    for key, value in a.fields:
        if key not in after_fields:
            out.append(DiffEntry(join_path(path, key), REMOVED, value, None, "field"))
        elif not values_equal(value, after_fields[key]):
            out.append(DiffEntry(join_path(path, key), MODIFIED, value, after_fields[key], "field"))
    for key, value in b.fields:
        if key not in before_fields:
            out.append(DiffEntry(join_path(path, key), ADDED, None, value, "field"))

    matched_a = {i for i, _ in pairs}
    matched_b = {j for _, j in pairs}
    for i, j in pairs:
        _diff_node(a.children[i], b.children[j], join_path(path, a.child_segment(i)), out)
    for i in reversed(range(len(a.children))):
        if i not in matched_a:
            out.append(DiffEntry(join_path(path, a.child_segment(i)), REMOVED, a.children[i], None, "child"))
    for j, child in enumerate(b.children):
        if j not in matched_b:
            out.append(DiffEntry(join_path(path, b.child_segment(j)), ADDED, None, child, "child"))


def _op(before: Any, after: Any) -> str:
    if before is None:
        return ADDED
    if after is None:
        return REMOVED
    return MODIFIED


def _fields_patchable(a: Form, b: Form) -> bool:
    """Shared keys keep their relative order and new keys are trailing."""
    before_keys = [key for key, _ in a.fields]
    after_keys = [key for key, _ in b.fields]
    shared = set(before_keys) & set(after_keys)
    if [k for k in before_keys if k in shared] != [k for k in after_keys if k in shared]:
        return False
    return _trailing([key in shared for key in after_keys])


def _child_keys(children) -> list[tuple]:
    seen: Counter = Counter()
    keys = []
    for index in range(len(children)):
        key = match_key(children, index)
        keys.append((key, seen[key]))
        seen[key] += 1
    return keys


def _child_pairs(a: Form, b: Form) -> Optional[list[tuple[int, int]]]:
    """Matched (a-index, b-index) pairs in order, or None when b cannot be
    reached by in-place edits, removals and trailing additions."""
    position = {key: i for i, key in enumerate(_child_keys(a.children))}
    pairs = []
    is_matched = []
    for j, key in enumerate(_child_keys(b.children)):
        i = position.get(key)
        is_matched.append(i is not None)
        if i is not None:
            pairs.append((i, j))
    a_order = [i for i, _ in pairs]
    if a_order != sorted(a_order) or not _trailing(is_matched):
        return None
    return pairs


def _trailing(flags: list[bool]) -> bool:
    """True when every False comes after the last True."""
    seen_unmatched = False
    for flag in flags:
        if not flag:
            seen_unmatched = True
        elif seen_unmatched:
            return False
    return True


# ----------------------------------------------------------------------
# Application
# ----------------------------------------------------------------------


def apply_diff(form: Form, patch: FormDiff) -> Form:
    """Apply entries in order; ``apply_diff(a, diff(a, b)) == b``."""
    for entry in patch:
        form = _apply_entry(form, entry)
    return form


def _apply_entry(form: Form, entry: DiffEntry) -> Form:
    if entry.target == "form":
        if entry.path == "":
            return entry.after
        head, last = parent_path(entry.path)
        return update_at(form, head, lambda parent: _replace_child(parent, last, entry))

    head, last = parent_path(entry.path)

    if entry.target == "attribute":
        return update_at(form, head, lambda node: _set_attribute(node, last, entry.after))

    if entry.target == "field":
        return update_at(form, head, lambda node: _patch_field(node, last, entry))

    if entry.op == ADDED:
        return update_at(form, head, lambda node: replace(node, children=node.children + (entry.after,)))
    return update_at(form, head, lambda node: _replace_child(node, last, entry))


def _replace_child(parent: Form, segment: str, entry: DiffEntry) -> Form:
    index = parent.resolve_child(segment)
    if index is None:
        raise FormError(f"diff entry does not apply at {entry.path}", code="path-not-found")
    children = list(parent.children)
    if entry.op == REMOVED:
        del children[index]
    else:
        children[index] = entry.after
    return replace(parent, children=tuple(children))


def _set_attribute(node: Form, attribute: str, value: Any) -> Form:
    if attribute == "variant_key":
        return replace(node, variant=(value, node.variant_value))
    if attribute == "variant_value":
        return replace(node, variant=(node.variant_key, value))
    if attribute in ("name", "content"):
        return replace(node, **{attribute: value})
    raise FormError(f"not a patchable attribute: {attribute}", code="path-not-found")


def _patch_field(node: Form, key: str, entry: DiffEntry) -> Form:
    if entry.op == ADDED:
        return replace(node, fields=node.fields + ((key, entry.after),))
    if not node.has_field(key):
        raise FormError(f"diff entry does not apply at {entry.path}", code="path-not-found")
    if entry.op == REMOVED:
        return replace(node, fields=tuple((k, v) for k, v in node.fields if k != key))
    return replace(node, fields=tuple((k, entry.after if k == key else v) for k, v in node.fields))
