"""Canonical text for forms, and the content hash built on it.

Layout: the header line ``kind[ name][, key: scalar]``, then fields in
declaration order, then content lines, then children, each level indented
two spaces. LF line endings, UTF-8. A Form-valued field prints as
``key: quote`` with the form indented below it.
"""
import hashlib
import json
import sys
from collections.abc import Mapping
from pathlib import Path
from typing import Any

# Handle imports for both module and direct execution
try:
    from ..models.errors import FormError, NumberRangeError
    from ..models.form import Form
    from ..models.kind import Kind
    from ..models.values import (
        IDENTIFIER_RE, NAME_RE, Expression, QuoteTemplate, format_number, is_number,
    )
    from ..parsers.expr_parser import static_literal
    from ..parsers.source_cleaner import SPLICE_PREFIXES, SourceCleaner
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import FormError, NumberRangeError
    from models.form import Form
    from models.kind import Kind
    from models.values import (
        IDENTIFIER_RE, NAME_RE, Expression, QuoteTemplate, format_number, is_number,
    )
    from parsers.expr_parser import static_literal
    from parsers.source_cleaner import SPLICE_PREFIXES, SourceCleaner


INDENT = "  "


class FormTextWriter:
    """Renders forms as canonical surface text."""

    @classmethod
    def render(cls, form: Form) -> str:
        """Canonical text of any form. Total: never raises."""
        lines: list[str] = []
        cls._render_form(form, 0, lines)
        return "".join(line + "\n" for line in lines)

    @classmethod
    def to_text(cls, form: Form) -> str:
        """Canonical text that parses back to ``form``.

        Raises ``invalid-form`` for a machine root that fails validation, or
        for any part the surface syntax cannot carry.
        """
        if form.kind is Kind.MACHINE:
            violations = form.validate()
            if violations:
                raise FormError(f"cannot print an invalid form: {violations[0]}")
        problem = cls.unprintable(form)
        if problem:
            raise FormError(f"cannot print form: {problem}")
        return cls.render(form)

    @classmethod
    def unprintable(cls, form: Form, path: str = "(root)") -> str:
        """Describe the first part of ``form`` with no surface syntax, or ""."""
        if form.name is not None and not NAME_RE.match(form.name):
            return f"{path}: name {form.name!r} is not a valid name"
        if form.variant is not None and not IDENTIFIER_RE.match(form.variant_key):
            return f"{path}: variant key {form.variant_key!r} is not an identifier"
        for key, value in form.fields:
            if not IDENTIFIER_RE.match(key):
                return f"{path}: field key {key!r} is not an identifier"
            problem = cls._unprintable_value(value, f"{path}.{key}")
            if problem:
                return problem
        for index, child in enumerate(form.children):
            problem = cls.unprintable(child, f"{path}.#{index}")
            if problem:
                return problem
        return ""

    @classmethod
    def _unprintable_value(cls, value: Any, path: str, nested: bool = False) -> str:
        if isinstance(value, Form):
            return f"{path}: forms inside lists or associations" if nested else cls.unprintable(value, path)
        if isinstance(value, QuoteTemplate):
            return f"{path}: quote templates inside lists or associations" if nested else ""
        if isinstance(value, Expression):
            return cls._unprintable_expression(value.source, path, nested)
        if isinstance(value, Mapping):
            for key, item in value.items():
                problem = cls._unprintable_value(item, f"{path}.{key}", True)
                if problem:
                    return problem
        elif isinstance(value, (list, tuple)):
            for index, item in enumerate(value):
                problem = cls._unprintable_value(item, f"{path}[{index}]", True)
                if problem:
                    return problem
        return ""

    @classmethod
    def _unprintable_expression(cls, source: str, path: str, nested: bool) -> str:
        if nested:
            return f"{path}: expressions inside lists or associations"
        text = source.strip()
        if not text or text != source or "\n" in source:
            return f"{path}: expression text must be one trimmed line"
        if text == "quote" or text.startswith(SPLICE_PREFIXES):
            return f"{path}: expression text reads as quote or splice syntax"
        if SourceCleaner.strip_comment(text) != text or SourceCleaner.bracket_balance(text) > 0:
            return f"{path}: expression text would not survive re-parsing"
        try:
            reads_as_literal = static_literal(text)[0]
        except NumberRangeError:
            return f"{path}: expression text holds a number out of range"
        if reads_as_literal:
            return f"{path}: expression text reads back as a literal"
        return ""

    @classmethod
    def _render_form(cls, form: Form, depth: int, lines: list[str]) -> None:
        pad = INDENT * depth
        lines.append(pad + cls.header(form))

        field_pad = INDENT * (depth + 1)
        for key, value in form.fields:
            if isinstance(value, Form):
                lines.append(f"{field_pad}{key}: quote")
                cls._render_form(value, depth + 2, lines)
            elif isinstance(value, QuoteTemplate):
                lines.append(f"{field_pad}{key}: quote")
                block_pad = INDENT * (depth + 2)
                lines.extend(block_pad + line for line in value.source.split("\n") if line.strip())
            else:
                lines.append(f"{field_pad}{key}: {cls.render_value(value)}")

        if form.content is not None:
            lines.extend(field_pad + _quote(line) for line in form.content.split("\n"))

        for child in form.children:
            cls._render_form(child, depth + 1, lines)

    @classmethod
    def header(cls, form: Form) -> str:
        text = form.kind.value
        if form.name is not None:
            text += f" {form.name}"
        if form.variant is not None:
            text += f", {form.variant_key}: {cls.render_value(form.variant_value)}"
        return text

    @classmethod
    def render_value(cls, value: Any) -> str:
        """Literal text of a Value in field position."""
        if isinstance(value, Expression):
            return value.source
        if value is None:
            return "null"
        if isinstance(value, bool):
            return "true" if value else "false"
        if is_number(value):
            return format_number(value)
        if isinstance(value, str):
            return _quote(value)
        if isinstance(value, Mapping):
            items = ", ".join(f"{_assoc_key(key)}: {cls.render_value(item)}" for key, item in value.items())
            return "{" + items + "}"
        if isinstance(value, (list, tuple)):
            return "[" + ", ".join(cls.render_value(item) for item in value) + "]"
        if isinstance(value, Form):
            # Only reachable inside lists; keeps the rendering total.
            return "quote(" + "; ".join(cls.render(value).splitlines()) + ")"
        if isinstance(value, QuoteTemplate):
            return "quote(" + "; ".join(value.source.splitlines()) + ")"
        return repr(value)


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _assoc_key(key: str) -> str:
    if IDENTIFIER_RE.match(key) and key not in ("match", "case", "true", "false", "null"):
        return key
    return _quote(key)


def to_text(form: Form) -> str:
    return FormTextWriter.to_text(form)


def print_form(form: Form) -> str:
    """The pretty-printer the parser round-trips with; same as ``to_text``."""
    return FormTextWriter.to_text(form)


def render_text(form: Form) -> str:
    return FormTextWriter.render(form)


def form_hash(form: Form) -> str:
    """SHA-256 of the canonical text, as lowercase hex."""
    return hashlib.sha256(FormTextWriter.render(form).encode("utf-8")).hexdigest()
