"""Surface syntax parser: indentation-sensitive keyword hierarchy to forms.

Each logical line is one of::

    kindword [name][, variantkey: scalar]     a form header
    fieldkey: expression-text                 a field of the enclosing form
    fieldkey: quote                           a quote block, indented below
    "text"                                    a content line
    *(expr)  /  $(...expr)                    splice child lines (quotes only)

Indentation is exactly two spaces per level. Parsing never evaluates
expression text: fields keep their raw text unless it is a pure literal.
"""
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

# Handle imports for both module and direct execution
try:
    from ..models.errors import NumberRangeError, ParseError
    from ..models.form import Form
    from ..models.kind import ASK_FROM, ASK_USING, Kind, is_legal_child
    from ..models.values import (
        IDENTIFIER_RE, NAME_RE, Expression, QuoteTemplate, is_scalar,
    )
    from .expr_parser import static_literal
    from .source_cleaner import INDENT_UNIT, SourceCleaner, SourceLine
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import NumberRangeError, ParseError
    from models.form import Form
    from models.kind import ASK_FROM, ASK_USING, Kind, is_legal_child
    from models.values import (
        IDENTIFIER_RE, NAME_RE, Expression, QuoteTemplate, is_scalar,
    )
    from parsers.expr_parser import static_literal
    from parsers.source_cleaner import INDENT_UNIT, SourceCleaner, SourceLine


SCALAR_SPLICE = "scalar-or-form"
SPREAD_SPLICE = "spread"

QUOTE_KEYWORD = "quote"

_FIELD_RE = re.compile(r'^([^\s,:"]+):\s*(.*)$')
_HEADER_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_-]*)(.*)$")
_VARIANT_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.+?)\s*$")


@dataclass
class SpliceMark:
    """A splice site inside a quote block, kept as raw expression text."""

    variant: str
    expression: str
    line: int
    column: int


@dataclass
class SourceNode:
    kind_word: str
    name: Optional[str] = None
    variant: Optional[tuple] = None
    fields: list = field(default_factory=list)
    content: list = field(default_factory=list)
    children: list = field(default_factory=list)
    line: int = 1
    column: int = 1

    def splice_marks(self) -> list[SpliceMark]:
        """Marks owned by this tree; nested quote blocks keep their own."""
        marks = [f.value for f in self.fields if isinstance(f.value, SpliceMark)]
        for child in self.children:
            if isinstance(child, SpliceMark):
                marks.append(child)
            else:
                marks.extend(child.splice_marks())
        return marks


@dataclass
class SourceQuote:
    """A ``key: quote`` block: its parsed root and its dedented text."""

    root: SourceNode
    source: str
    line: int
    column: int

    @property
    def has_splices(self) -> bool:
        return bool(self.root.splice_marks())


@dataclass
class SourceField:
    key: str
    value: Union[str, SpliceMark, SourceQuote]
    line: int
    column: int


SpliceResolver = Callable[[SpliceMark], Any]


# ----------------------------------------------------------------------
# Entry points
# ----------------------------------------------------------------------


def parse_source(text: str) -> Form:
    """Parse a ``.mt`` source into a machine-rooted form."""
    lines = SourceCleaner.logical_lines(text)
    if not lines:
        raise ParseError("source contains no forms", 1, 1, "structure")

    root = _single_root(_BlockParser(lines, in_quote=False).parse_block(0))
    if root.kind_word != Kind.MACHINE.value:
        raise ParseError(
            f"the root form must be a machine, not {root.kind_word}",
            root.line, root.column, "structure",
        )
    _check_structure(root, None)

    form = build_form(root)
    violations = form.validate()
    if violations:
        raise ParseError(f"invalid form: {violations[0]}", root.line, root.column, "structure")
    return form


def parse_quote(block_text: str) -> SourceNode:
    """Parse a quote block into a node tree with splice marks left in place."""
    lines = SourceCleaner.logical_lines(block_text)
    if not lines:
        raise ParseError("quote block is empty", 1, 1, "structure")
    offset = lines[0].indent
    if offset:
        if any(line.indent < offset for line in lines):
            bad = next(line for line in lines if line.indent < offset)
            raise ParseError("quote block dedents below its first line", bad.number, bad.column, "indentation")
        lines = [SourceLine(line.number, line.indent - offset, line.text) for line in lines]

    root = _single_root(_BlockParser(lines, in_quote=True).parse_block(0))
    _check_structure(root, None)
    return root


def build_form(node: SourceNode, resolve: Optional[SpliceResolver] = None) -> Form:
    """Convert a node tree into a form.

    ``resolve`` maps each splice mark to its value; a spread mark must
    resolve to a list of forms. Without a resolver, splice marks are an error.
    """
    fields = []
    for source_field in node.fields:
        value = source_field.value
        if isinstance(value, SpliceMark):
            fields.append((source_field.key, _resolve(value, resolve)))
        elif isinstance(value, SourceQuote):
            fields.append((source_field.key, quote_value(value)))
        else:
            fields.append((source_field.key, field_value(value)))

    children = []
    for child in node.children:
        if isinstance(child, SpliceMark):
            resolved = _resolve(child, resolve)
            if child.variant == SPREAD_SPLICE:
                children.extend(resolved)
            else:
                children.append(resolved)
        else:
            children.append(build_form(child, resolve))

    return Form(
        kind=Kind.parse(node.kind_word),
        name=node.name,
        variant=node.variant,
        content="\n".join(node.content) if node.content else None,
        fields=tuple(fields),
        children=tuple(children),
    )


def field_value(text: str) -> Any:
    """A literal Value when ``text`` is a pure literal, else Expression."""
    is_literal, value = static_literal(text)
    return value if is_literal else Expression(text)


def quote_value(quote: SourceQuote) -> Any:
    """A splice-free quote is the form it denotes; otherwise a template."""
    if quote.has_splices:
        return QuoteTemplate(quote.source)
    return build_form(quote.root)


def _resolve(mark: SpliceMark, resolve: Optional[SpliceResolver]) -> Any:
    if resolve is None:
        raise ParseError(
            "splice marks need an enclosing quote to be instantiated",
            mark.line, mark.column, "malformed-splice",
        )
    return resolve(mark)


def _single_root(items: list):
    if len(items) > 1:
        extra = items[1]
        raise ParseError("a source holds exactly one root form", extra.line, extra.column, "structure")
    root = items[0]
    if isinstance(root, SpliceMark):
        raise ParseError("the root of a block cannot be a splice", root.line, root.column, "structure")
    return root


# ----------------------------------------------------------------------
# Line-level parser
# ----------------------------------------------------------------------


class _BlockParser:
    def __init__(self, lines: list[SourceLine], in_quote: bool):
        self.lines = lines
        self.in_quote = in_quote
        self.pos = 0

    def parse_block(self, depth: int) -> list:
        """Form headers (and splice child lines) at ``depth``."""
        items = []
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            self._check_indent(line, depth)
            if line.depth < depth:
                break
            if line.text.startswith('"') or _FIELD_RE.match(line.text):
                raise ParseError("expected a form header", line.number, line.column, "structure")
            items.append(self._parse_child(line, depth))
        return items

    def _check_indent(self, line: SourceLine, max_depth: int) -> None:
        if line.indent % INDENT_UNIT:
            raise ParseError(
                f"indentation must be a multiple of {INDENT_UNIT} spaces",
                line.number, line.column, "indentation",
            )
        if line.depth > max_depth:
            raise ParseError(
                f"expected indentation of {max_depth * INDENT_UNIT} spaces, found {line.indent}",
                line.number, line.column, "indentation",
            )

    def _parse_child(self, line: SourceLine, depth: int):
        if line.text.startswith(("*(", "$(")):
            self.pos += 1
            return self._splice_line(line)
        return self._parse_node(line, depth)

    def _parse_node(self, line: SourceLine, depth: int) -> SourceNode:
        node = _parse_header(line)
        self.pos += 1
        keys = set()

        while self.pos < len(self.lines):
            member = self.lines[self.pos]
            self._check_indent(member, depth + 1)
            if member.depth <= depth:
                break

            if member.text.startswith('"'):
                node.content.append(_content_line(member))
                self.pos += 1
            elif member.text.startswith(("*(", "$(")):
                self.pos += 1
                node.children.append(self._splice_line(member))
            elif _FIELD_RE.match(member.text):
                source_field = self._parse_field(member)
                if source_field.key in keys:
                    raise ParseError(
                        f"duplicate field key {source_field.key!r}",
                        member.number, member.column, "malformed-field",
                    )
                keys.add(source_field.key)
                node.fields.append(source_field)
            else:
                node.children.append(self._parse_node(member, depth + 1))
        return node

    def _parse_field(self, line: SourceLine) -> SourceField:
        match = _FIELD_RE.match(line.text)
        key, value_text = match.group(1), (match.group(2) or "").strip()
        if not IDENTIFIER_RE.match(key):
            raise ParseError(f"invalid field key {key!r}", line.number, line.column, "malformed-field")
        value_column = line.column + line.text.index(":") + 2
        if not value_text:
            raise ParseError(f"field {key!r} has no value", line.number, value_column, "malformed-field")
        self.pos += 1

        if value_text == QUOTE_KEYWORD:
            return SourceField(key, self._quote_block(line), line.number, line.column)

        if value_text.startswith("$("):
            raise ParseError(
                "spread splices are only allowed as child lines",
                line.number, value_column, "malformed-splice",
            )
        if value_text.startswith("*("):
            if not self.in_quote:
                raise ParseError(
                    "splices are only allowed inside quote blocks",
                    line.number, value_column, "malformed-splice",
                )
            mark = _parse_splice(value_text, SCALAR_SPLICE, line.number, value_column)
            return SourceField(key, mark, line.number, line.column)

        _scan_literal(value_text, line.number, line.column + match.start(2))
        return SourceField(key, value_text, line.number, line.column)

    def _quote_block(self, line: SourceLine) -> SourceQuote:
        start = self.pos
        while self.pos < len(self.lines) and self.lines[self.pos].indent > line.indent:
            self.pos += 1
        block = self.lines[start:self.pos]
        if not block:
            raise ParseError("quote needs an indented block", line.number, line.column, "malformed-field")

        base = line.depth + 1
        roots = _BlockParser(block, in_quote=True).parse_block(base)
        root = _single_root(roots)
        _check_structure(root, None)
        source = "".join(
            " " * (item.indent - base * INDENT_UNIT) + item.text + "\n" for item in block
        )
        return SourceQuote(root, source, line.number, line.column)

    def _splice_line(self, line: SourceLine) -> SpliceMark:
        if not self.in_quote:
            raise ParseError(
                "splices are only allowed inside quote blocks",
                line.number, line.column, "malformed-splice",
            )
        variant = SPREAD_SPLICE if line.text.startswith("$(") else SCALAR_SPLICE
        mark = _parse_splice(line.text, variant, line.number, line.column)
        if self.pos < len(self.lines) and self.lines[self.pos].indent > line.indent:
            nested = self.lines[self.pos]
            raise ParseError("splice lines cannot have children", nested.number, nested.column, "indentation")
        return mark


def _parse_header(line: SourceLine) -> SourceNode:
    match = _HEADER_RE.match(line.text)
    word = match.group(1) if match else line.text.split()[0]
    if Kind.parse(word) is None:
        raise ParseError(f"unknown keyword {word!r}", line.number, line.column, "unknown-keyword")

    rest = match.group(2)
    if rest and rest[0] not in " ,":
        raise ParseError(f"malformed form header {line.text!r}", line.number, line.column, "structure")

    name_part, variant_part = _split_once(rest, ",")
    name = name_part.strip() or None
    if name is not None and not NAME_RE.match(name):
        raise ParseError(
            f"invalid name {name!r}", line.number, line.column + len(word) + 1, "structure"
        )

    variant = None
    if variant_part is not None:
        variant_column = line.column + len(word) + len(name_part) + 1
        if _split_once(variant_part, ",")[1] is not None:
            raise ParseError("a header carries one variant clause", line.number, variant_column, "malformed-field")
        clause = _VARIANT_RE.match(variant_part)
        if clause is None:
            raise ParseError("variant clause must read 'key: value'", line.number, variant_column, "malformed-field")
        is_literal, value = _scan_literal(clause.group(2), line.number, variant_column + clause.start(2))
        if not is_literal or not is_scalar(value):
            raise ParseError("variant values are scalar literals", line.number, variant_column, "malformed-field")
        variant = (clause.group(1), value)

    return SourceNode(word, name, variant, line=line.number, column=line.column)


def _scan_literal(text: str, line: int, column: int) -> tuple[bool, Any]:
    """``static_literal`` with out-of-range numbers reported at their column."""
    try:
        return static_literal(text)
    except NumberRangeError as e:
        raise ParseError(e.message, line, column + e.position, "malformed-field") from e


def _split_once(text: str, separator: str) -> tuple[str, Optional[str]]:
    """Split at the first separator outside string literals."""
    in_string = False
    escaped = False
    for index, char in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == '"':
                in_string = False
        elif char == '"':
            in_string = True
        elif char == separator:
            return text[:index], text[index + 1:]
    return text, None


def _content_line(line: SourceLine) -> str:
    try:
        value = json.loads(line.text)
    except json.JSONDecodeError:
        value = None
    if not isinstance(value, str):
        raise ParseError("content lines are single string literals", line.number, line.column, "malformed-field")
    return value


def _parse_splice(text: str, variant: str, line: int, column: int) -> SpliceMark:
    depth = 0
    close = None
    for index, char in enumerate(text[1:], start=1):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth == 0:
                close = index
                break
    if close is None or close != len(text) - 1:
        raise ParseError(f"unbalanced splice {text!r}", line, column, "malformed-splice")

    expression = text[2:-1].strip()
    if variant == SPREAD_SPLICE:
        if not expression.startswith("..."):
            raise ParseError("spread splices read $(...expr)", line, column, "malformed-splice")
        expression = expression[3:].strip()
    if not expression:
        raise ParseError("empty splice", line, column, "malformed-splice")
    return SpliceMark(variant, expression, line, column)


def _check_structure(node: SourceNode, parent: Optional[Kind]) -> None:
    kind = Kind.parse(node.kind_word)
    if parent is not None and not is_legal_child(parent, kind):
        raise ParseError(
            f"{kind.value} is not allowed under {parent.value}", node.line, node.column, "structure"
        )
    if kind.requires_name and not node.name:
        raise ParseError(f"{kind.value} forms need a name", node.line, node.column, "structure")
    if kind is Kind.ASK:
        key, target = node.variant if node.variant else (None, None)
        if key not in (ASK_USING, ASK_FROM) or not isinstance(target, str) or not target:
            raise ParseError(
                "ask steps need a 'using' or 'from' clause", node.line, node.column, "structure"
            )

    names = set()
    for child in node.children:
        if isinstance(child, SpliceMark):
            continue
        if child.name is not None:
            if child.name in names:
                raise ParseError(f"duplicate name {child.name!r}", child.line, child.column, "structure")
            names.add(child.name)
        _check_structure(child, kind)
