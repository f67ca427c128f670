"""Line cleaning for form source text.

Turns raw source into logical lines: BOM and CRLF removed, comments and
trailing blanks stripped, empty lines dropped, and lines with unbalanced
brackets joined with their continuations.
"""
import sys
from dataclasses import dataclass
from pathlib import Path

# Handle imports for both module and direct execution
try:
    from ..models.errors import ParseError
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import ParseError


INDENT_UNIT = 2

SPLICE_PREFIXES = ("*(", "$(")


@dataclass(frozen=True)
class SourceLine:
    """One logical line. ``number`` and ``indent`` refer to its first
    physical line."""

    number: int
    indent: int
    text: str

    @property
    def depth(self) -> int:
        return self.indent // INDENT_UNIT

    @property
    def column(self) -> int:
        return self.indent + 1


class SourceCleaner:
    """Utility class for preparing source text for the surface parser."""

    OPENERS = "([{"
    CLOSERS = ")]}"

    @classmethod
    def clean_text(cls, text: str) -> str:
        """Remove BOM and normalise line endings to LF."""
        if not text:
            return ""
        text = text.lstrip("\ufeff")
        return text.replace("\r\n", "\n").replace("\r", "\n")

    @classmethod
    def strip_comment(cls, line: str) -> str:
        """Drop a ``#`` comment that sits outside any string literal."""
        in_string = False
        escaped = False
        for index, char in enumerate(line):
            if in_string:
                if escaped:
                    escaped = False
                elif char == "\\":
                    escaped = True
                elif char == '"':
                    in_string = False
            elif char == '"':
                in_string = True
            elif char == "#":
                return line[:index]
        return line

    @classmethod
    def bracket_balance(cls, text: str) -> int:
        """Openers minus closers, ignoring those inside string literals."""
        balance = 0
        in_string = False
        escaped = False
        for char in text:
            if in_string:
                if escaped:
                    escaped = False
                elif char == "\\":
                    escaped = True
                elif char == '"':
                    in_string = False
            elif char == '"':
                in_string = True
            elif char in cls.OPENERS:
                balance += 1
            elif char in cls.CLOSERS:
                balance -= 1
        return balance

    @classmethod
    def physical_lines(cls, text: str) -> list[SourceLine]:
        """Non-blank lines with comments removed; tabs in indentation fail."""
        lines = []
        for number, raw in enumerate(cls.clean_text(text).split("\n"), start=1):
            stripped = cls.strip_comment(raw).rstrip()
            if not stripped.strip():
                continue
            body = stripped.lstrip(" ")
            indent = len(stripped) - len(body)
            if body.startswith("\t"):
                raise ParseError(
                    "tabs are not allowed in indentation", number, indent + 1, "indentation"
                )
            lines.append(SourceLine(number, indent, body))
        return lines

    @classmethod
    def logical_lines(cls, text: str) -> list[SourceLine]:
        """Physical lines with open-bracket continuations folded in.

        Continuations are joined with single spaces. Splice lines never
        continue: an unbalanced splice is reported by the parser instead.
        """
        physical = cls.physical_lines(text)
        logical = []
        index = 0
        while index < len(physical):
            line = physical[index]
            index += 1
            if cls._is_splice(line.text):
                logical.append(line)
                continue

            parts = [line.text]
            balance = cls.bracket_balance(line.text)
            while balance > 0:
                if index >= len(physical):
                    raise ParseError(
                        "unclosed bracket at end of input",
                        line.number, line.column, "malformed-field",
                    )
                continuation = physical[index].text
                index += 1
                parts.append(continuation)
                balance += cls.bracket_balance(continuation)
            logical.append(SourceLine(line.number, line.indent, " ".join(parts)))
        return logical

    @classmethod
    def _is_splice(cls, text: str) -> bool:
        if text.startswith(SPLICE_PREFIXES):
            return True
        _, sep, value = text.partition(":")
        return bool(sep) and value.strip().startswith(SPLICE_PREFIXES)
