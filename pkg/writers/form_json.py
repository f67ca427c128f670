"""JSON interchange encoding for forms and the Values they carry.

A form is an object with ``kind``, ``name``, ``variant``, ``content``,
``fields`` (``[key, value]`` pairs, order kept) and ``children``. Values
that JSON cannot carry directly are tagged objects with a single key:
``{"$form": ...}``, ``{"$expr": text}``, ``{"$quote": text}``, and
``{"$assoc": {...}}`` for an association whose keys start with ``$``.
"""
import json
import sys
from collections.abc import Mapping
from pathlib import Path
from typing import Any

# Handle imports for both module and direct execution
try:
    from ..models.errors import FormError
    from ..models.form import Form, checked_name
    from ..models.kind import Kind
    from ..models.values import Expression, QuoteTemplate, is_number, is_scalar
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import FormError
    from models.form import Form, checked_name
    from models.kind import Kind
    from models.values import Expression, QuoteTemplate, is_number, is_scalar


FORM_KEYS = ("kind", "name", "variant", "content", "fields", "children")

TAG_FORM = "$form"
TAG_EXPR = "$expr"
TAG_QUOTE = "$quote"
TAG_ASSOC = "$assoc"


def encode_form(form: Form) -> dict:
    return {
        "kind": form.kind.value,
        "name": form.name,
        "variant": None if form.variant is None else {
            "key": form.variant_key,
            "value": form.variant_value,
        },
        "content": form.content,
        "fields": [[key, encode_value(value)] for key, value in form.fields],
        "children": [encode_form(child) for child in form.children],
    }


def encode_value(value: Any) -> Any:
    if isinstance(value, Form):
        return {TAG_FORM: encode_form(value)}
    if isinstance(value, Expression):
        return {TAG_EXPR: value.source}
    if isinstance(value, QuoteTemplate):
        return {TAG_QUOTE: value.source}
    if isinstance(value, Mapping):
        encoded = {key: encode_value(item) for key, item in value.items()}
        if any(key.startswith("$") for key in encoded):
            return {TAG_ASSOC: encoded}
        return encoded
    if isinstance(value, (list, tuple)):
        return [encode_value(item) for item in value]
    if value is None or isinstance(value, (str, bool)) or is_number(value):
        return value
    # CapabilityAtom and other printable leaves travel as text.
    return str(value)


def decode_value(data: Any) -> Any:
    if isinstance(data, dict):
        if len(data) == 1:
            (tag, inner), = data.items()
            if tag == TAG_FORM:
                return decode_form(inner)
            if tag == TAG_EXPR:
                return Expression(_require(inner, str, "$expr"))
            if tag == TAG_QUOTE:
                return QuoteTemplate(_require(inner, str, "$quote"))
            if tag == TAG_ASSOC:
                return {key: decode_value(item) for key, item in _require(inner, dict, "$assoc").items()}
        return {key: decode_value(item) for key, item in data.items()}
    if isinstance(data, list):
        return [decode_value(item) for item in data]
    return data


def decode_form(data: Any) -> Form:
    if not isinstance(data, dict):
        raise _schema("a form must be a JSON object")
    unknown = sorted(set(data) - set(FORM_KEYS))
    if unknown:
        raise _schema(f"unknown form keys: {unknown}")
    if "kind" not in data:
        raise _schema("kind is required")
    kind = Kind.parse(data["kind"]) if isinstance(data["kind"], str) else None
    if kind is None:
        raise _schema(f"unknown kind {data['kind']!r}")

    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise _schema("name must be a string or null")
    try:
        checked_name(kind, name)
    except FormError as e:
        raise _schema(e.message) from e
    content = data.get("content")
    if content is not None and not isinstance(content, str):
        raise _schema("content must be a string or null")

    variant = data.get("variant")
    if variant is not None:
        if not isinstance(variant, dict) or set(variant) != {"key", "value"}:
            raise _schema("variant must be null or {key, value}")
        if not isinstance(variant["key"], str) or not is_scalar(variant["value"]):
            raise _schema("variant key must be a string and its value a scalar")
        variant = (variant["key"], variant["value"])

    fields = data.get("fields", [])
    if not isinstance(fields, list) or not all(
        isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str) for pair in fields
    ):
        raise _schema("fields must be a list of [key, value] pairs")

    children = data.get("children", [])
    if not isinstance(children, list):
        raise _schema("children must be a list")

    try:
        return Form(
            kind=kind,
            name=name,
            variant=variant,
            content=content,
            fields=tuple((key, decode_value(value)) for key, value in fields),
            children=tuple(decode_form(child) for child in children),
        )
    except FormError as e:
        if e.code == "schema-violation":
            raise
        raise _schema(e.message) from e


def to_json(form: Form, indent: int = 2) -> str:
    return json.dumps(encode_form(form), ensure_ascii=False, indent=indent)


def from_json(text: str) -> Form:
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, TypeError) as e:
        raise FormError(f"not valid JSON: {e}", code="malformed-json") from e
    return decode_form(data)


def _require(value: Any, expected: type, tag: str) -> Any:
    if not isinstance(value, expected):
        raise _schema(f"{tag} holds a {expected.__name__}")
    return value


def _schema(message: str) -> FormError:
    return FormError(message, code="schema-violation")
