"""Pure transformations over forms.

Every function returns a new form and leaves its arguments untouched. Paths
follow the grammar in :mod:`models.form`; the parent path of a structural
edit may be ``""`` to mean the root itself.
"""
import sys
from collections.abc import Mapping
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional

try:
    from .errors import FormError
    from .form import (
        ATTRIBUTES, Form, NAME_RE, freeze_value, split_path,
    )
    from .kind import is_legal_child
    from .values import is_scalar
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import FormError
    from models.form import (
        ATTRIBUTES, Form, NAME_RE, freeze_value, split_path,
    )
    from models.kind import is_legal_child
    from models.values import is_scalar


def set_value(form: Form, path: str, value: Any) -> Form:
    """Replace the field or attribute at ``path``; it must already exist."""
    return _set(form, split_path(path), value, path)


def add_child(form: Form, path: str, child: Form) -> Form:
    """Append ``child`` to the form at ``path``."""
    _require_form(child)

    def append(parent: Form) -> Form:
        _check_legal(parent, child)
        return replace(parent, children=parent.children + (child,))

    return _update(form, _segments(path), append, path)


def remove_child(form: Form, path: str) -> Form:
    head, index = _locate_child(form, path)

    def drop(parent: Form) -> Form:
        return replace(parent, children=parent.children[:index] + parent.children[index + 1:])

    return _update(form, head, drop, path)


def replace_child(form: Form, path: str, child: Form) -> Form:
    _require_form(child)
    head, index = _locate_child(form, path)

    def swap(parent: Form) -> Form:
        _check_legal(parent, child)
        children = list(parent.children)
        children[index] = child
        return replace(parent, children=tuple(children))

    return _update(form, head, swap, path)


def merge(base: Form, overlay: Form) -> Form:
    """Overlay wins on fields, name, variant and content; children pair up by
    (kind, name), unnamed ones by position among their kind."""
    if base.kind is not overlay.kind:
        raise FormError(
            f"cannot merge {overlay.kind.value} into {base.kind.value}",
            code="kind-mismatch",
        )

    fields = dict(base.fields)
    fields.update(overlay.fields)

    children = list(base.children)
    matched: set[int] = set()
    unnamed_seen: dict = {}
    for child in overlay.children:
        index = _match_child(base.children, child, matched, unnamed_seen)
        if index is None:
            children.append(child)
        else:
            matched.add(index)
            children[index] = merge(base.children[index], child)

    return Form(
        kind=base.kind,
        name=overlay.name if overlay.name is not None else base.name,
        variant=overlay.variant if overlay.variant is not None else base.variant,
        content=overlay.content if overlay.content is not None else base.content,
        fields=tuple(fields.items()),
        children=tuple(children),
    )


def update_at(form: Form, path: str, fn: Callable[[Form], Form]) -> Form:
    """Apply ``fn`` to the form at ``path`` ("" is the root) and rebuild the
    spine above it. No legality checks; callers own the edit."""
    return _update(form, _segments(path), fn, path)


def match_key(children, index: int) -> tuple:
    """Identity of a child for pairing: (kind, name) when named, otherwise
    (kind, position among unnamed siblings of that kind)."""
    child = children[index]
    if child.name is not None:
        return (child.kind, "name", child.name)
    position = sum(
        1 for other in children[:index] if other.name is None and other.kind is child.kind
    )
    return (child.kind, "position", position)


def _match_child(children, child: Form, matched: set, unnamed_seen: dict) -> Optional[int]:
    if child.name is not None:
        for index, candidate in enumerate(children):
            if index not in matched and candidate.kind is child.kind and candidate.name == child.name:
                return index
        return None

    position = unnamed_seen.get(child.kind, 0)
    unnamed_seen[child.kind] = position + 1
    seen = 0
    for index, candidate in enumerate(children):
        if candidate.name is None and candidate.kind is child.kind:
            if seen == position:
                return None if index in matched else index
            seen += 1
    return None


# ----------------------------------------------------------------------
# Path plumbing
# ----------------------------------------------------------------------


def _segments(path: str) -> list[str]:
    return [] if path == "" else split_path(path)


def _locate_child(form: Form, path: str) -> tuple[list[str], int]:
    segments = split_path(path)
    head, last = segments[:-1], segments[-1]
    parent = _descend(form, head, path)
    index = parent.resolve_child(last)
    if index is None:
        raise FormError(f"no child at {path}", code="path-not-found")
    return head, index


def _descend(form: Form, segments: list[str], path: str) -> Form:
    node = form
    for segment in segments:
        index = node.resolve_child(segment)
        if index is not None:
            node = node.children[index]
        elif isinstance(node.field(segment), Form):
            node = node.field(segment)
        else:
            raise FormError(f"no form at {path}", code="path-not-found")
    return node


def _update(form: Form, segments: list[str], fn: Callable[[Form], Form], path: str) -> Form:
    """Rebuild the spine from the root down to the form at ``segments``."""
    if not segments:
        return fn(form)
    segment, rest = segments[0], segments[1:]
    index = form.resolve_child(segment)
    if index is not None:
        children = list(form.children)
        children[index] = _update(children[index], rest, fn, path)
        return replace(form, children=tuple(children))
    inner = form.field(segment)
    if isinstance(inner, Form):
        return _with_field(form, segment, _update(inner, rest, fn, path))
    raise FormError(f"no form at {path}", code="path-not-found")


def _set(node: Any, segments: list[str], value: Any, path: str) -> Any:
    segment, rest = segments[0], segments[1:]

    if isinstance(node, Mapping):
        if segment not in node:
            raise FormError(f"nothing at {path}", code="path-not-found")
        updated = dict(node)
        updated[segment] = value if not rest else _set(node[segment], rest, value, path)
        return freeze_value(updated)

    if not isinstance(node, Form):
        raise FormError(f"nothing at {path}", code="path-not-found")

    index = node.resolve_child(segment)
    if index is not None:
        if not rest:
            raise FormError(
                f"{path} names a child form; use replace_child", code="path-not-found"
            )
        children = list(node.children)
        children[index] = _set(children[index], rest, value, path)
        return replace(node, children=tuple(children))

    if node.has_field(segment):
        inner = value if not rest else _set(node.field(segment), rest, value, path)
        return _with_field(node, segment, inner)

    if not rest and segment in ATTRIBUTES:
        return _set_attribute(node, segment, value, path)

    raise FormError(f"nothing at {path}", code="path-not-found")


def _set_attribute(form: Form, attribute: str, value: Any, path: str) -> Form:
    if attribute == "kind":
        raise FormError("the kind of a form cannot be rewritten", code="illegal-attribute-write")

    if attribute == "name":
        if form.name is None:
            raise FormError(f"nothing at {path}", code="path-not-found")
        if value is None or value == "":
            if form.kind.requires_name:
                raise FormError(
                    f"{form.kind.value} forms need a name", code="missing-required-name"
                )
            return replace(form, name=None)
        if not isinstance(value, str) or not NAME_RE.match(value):
            raise FormError(f"not a valid name: {value!r}", code="invalid-name")
        return replace(form, name=value)

    if attribute == "content":
        if form.content is None:
            raise FormError(f"nothing at {path}", code="path-not-found")
        if value is not None and not isinstance(value, str):
            raise FormError("content must be text", code="invalid-value")
        return replace(form, content=value)

    if form.variant is None:
        raise FormError(f"nothing at {path}", code="path-not-found")
    key, current = form.variant
    if attribute == "variant_key":
        if not isinstance(value, str) or not value:
            raise FormError("variant key must be text", code="invalid-value")
        return replace(form, variant=(value, current))
    if not is_scalar(value):
        raise FormError("variant value must be a scalar", code="invalid-value")
    return replace(form, variant=(key, value))


def _with_field(form: Form, key: str, value: Any) -> Form:
    return replace(
        form,
        fields=tuple((k, value if k == key else v) for k, v in form.fields),
    )


def _check_legal(parent: Form, child: Form) -> None:
    if not is_legal_child(parent.kind, child.kind):
        raise FormError(
            f"{child.kind.value} is not allowed under {parent.kind.value}",
            code="illegal-child-kind",
        )


def _require_form(value: Any) -> None:
    if not isinstance(value, Form):
        raise FormError(f"expected a form, got {value!r}", code="invalid-value")
