"""Tokenizer and recursive-descent parser for field expressions.

Grammar, loosest binding first::

    expr       := match | comparison
    match      := 'match' comparison '{' ('case' pattern '=>' expr)+ '}'
    comparison := additive (('<' | '>' | '<=' | '>=' | '==' | '!=') additive)?
    additive   := postfix ('+' postfix)*
    postfix    := primary ('.' IDENT | '(' args ')')*
    primary    := literal | IDENT | '(' expr ')' | '[' items ']' | '{' pairs '}' | match
"""
import json
import math
import re
import sys
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

# Handle imports for both module and direct execution
try:
    from ..models.errors import EvalError, NumberRangeError
    from ..models.expr import (
        AssocExpr, Access, Binary, Call, Case, ListExpr, Literal, Match, Name,
        Reflect, Wildcard,
    )
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import EvalError, NumberRangeError
    from models.expr import (
        AssocExpr, Access, Binary, Call, Case, ListExpr, Literal, Match, Name,
        Reflect, Wildcard,
    )


KEYWORDS = {"match", "case", "true", "false", "null"}

COMPARISON_OPS = ("<", ">", "<=", ">=", "==", "!=")

_TOKEN_RE = re.compile(
    r"""
    (?P<space>\s+)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<op><=|>=|==|!=|=>|[<>+()\[\]{},:.])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

# A leading minus is only part of a number where an operand is expected.
_OPERAND_ENDS = {"number", "string", "ident"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int
    value: Any = None


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if match is None:
            raise _syntax(f"unexpected character {text[position]!r}", position)
        kind = match.lastgroup
        lexeme = match.group()
        if kind == "number" and lexeme.startswith("-") and tokens and (
            tokens[-1].kind in _OPERAND_ENDS or tokens[-1].text in (")", "]", "}")
        ):
            # "a -1" is not an expression in this language; report the minus.
            raise _syntax("unexpected '-'", position)
        if kind != "space":
            tokens.append(Token(kind, lexeme, position, _token_value(kind, lexeme, position)))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


def _token_value(kind: str, lexeme: str, position: int) -> Any:
    if kind == "number":
        if any(c in lexeme for c in ".eE"):
            value = float(lexeme)
            if math.isinf(value):
                raise NumberRangeError(f"number {lexeme} is out of range", position)
            return value
        return int(lexeme)
    if kind == "string":
        try:
            return json.loads(lexeme)
        except json.JSONDecodeError:
            raise _syntax(f"malformed string literal {lexeme}", position)
    return None


def _syntax(message: str, position: int) -> EvalError:
    return EvalError(f"{message} at offset {position}", code="syntax-error")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def at(self, text: str) -> bool:
        token = self.current
        return token.kind in ("op", "ident") and token.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise _syntax(f"expected {text!r}, found {self.current.text or 'end of input'!r}",
                          self.current.position)
        return self.advance()

    def parse(self):
        expr = self.expression()
        if self.current.kind != "end":
            raise _syntax(f"unexpected {self.current.text!r}", self.current.position)
        return expr

    def expression(self):
        if self.at("match"):
            return self.match()
        return self.comparison()

    def match(self):
        self.expect("match")
        scrutinee = self.comparison()
        self.expect("{")
        cases = []
        while self.at("case"):
            self.advance()
            pattern = self.pattern()
            self.expect("=>")
            cases.append(Case(pattern, self.expression()))
        if not cases:
            raise _syntax("match needs at least one case", self.current.position)
        self.expect("}")
        return Match(scrutinee, tuple(cases))

    def pattern(self):
        token = self.current
        if token.kind == "ident" and token.text == "_":
            self.advance()
            return Wildcard()
        literal = self.literal()
        if literal is None:
            raise _syntax("case patterns are literals or _", token.position)
        return literal

    def comparison(self):
        lhs = self.additive()
        if self.current.kind == "op" and self.current.text in COMPARISON_OPS:
            op = self.advance().text
            rhs = self.additive()
            if self.current.kind == "op" and self.current.text in COMPARISON_OPS:
                raise _syntax("comparisons do not chain", self.current.position)
            return Binary(op, lhs, rhs)
        return lhs

    def additive(self):
        expr = self.postfix()
        while self.at("+"):
            self.advance()
            expr = Binary("+", expr, self.postfix())
        return expr

    def postfix(self):
        expr = self.primary()
        while True:
            if self.at("."):
                self.advance()
                token = self.advance()
                if token.kind != "ident":
                    raise _syntax("expected a name after '.'", token.position)
                expr = Access(expr, token.text)
            elif self.at("("):
                expr = self.call(expr)
            else:
                return expr

    def call(self, callee):
        position = self.current.position
        name = _dotted_name(callee)
        if name is None:
            raise _syntax("only named builtins can be called", position)
        self.expect("(")
        args = self.sequence(")")
        if name == "reflect":
            if args:
                raise EvalError("reflect() takes no arguments", code="arity-mismatch")
            return Reflect()
        return Call(name, tuple(args))

    def sequence(self, closer: str) -> list:
        items = []
        if not self.at(closer):
            items.append(self.expression())
            while self.at(","):
                self.advance()
                items.append(self.expression())
        self.expect(closer)
        return items

    def primary(self):
        token = self.current
        literal = self.literal()
        if literal is not None:
            return literal
        if self.at("match"):
            return self.match()
        if token.kind == "ident":
            if token.text in KEYWORDS:
                raise _syntax(f"unexpected keyword {token.text!r}", token.position)
            self.advance()
            return Name(token.text)
        if self.at("("):
            self.advance()
            expr = self.expression()
            self.expect(")")
            return expr
        if self.at("["):
            self.advance()
            return ListExpr(tuple(self.sequence("]")))
        if self.at("{"):
            self.advance()
            return self.assoc()
        raise _syntax(f"unexpected {token.text or 'end of input'!r}", token.position)

    def assoc(self):
        pairs = []
        seen = set()
        if not self.at("}"):
            while True:
                key_token = self.advance()
                if key_token.kind == "ident" and key_token.text not in KEYWORDS:
                    key = key_token.text
                elif key_token.kind == "string":
                    key = key_token.value
                else:
                    raise _syntax("association keys are names or strings", key_token.position)
                if key in seen:
                    raise _syntax(f"duplicate association key {key!r}", key_token.position)
                seen.add(key)
                self.expect(":")
                pairs.append((key, self.expression()))
                if not self.at(","):
                    break
                self.advance()
        self.expect("}")
        return AssocExpr(tuple(pairs))

    def literal(self) -> Optional[Literal]:
        token = self.current
        if token.kind in ("number", "string"):
            self.advance()
            return Literal(token.value)
        if token.kind == "ident" and token.text in ("true", "false", "null"):
            self.advance()
            return Literal({"true": True, "false": False, "null": None}[token.text])
        return None


def _dotted_name(expr) -> Optional[str]:
    if isinstance(expr, Name):
        return expr.identifier
    if isinstance(expr, Access):
        base = _dotted_name(expr.base)
        return None if base is None else f"{base}.{expr.attribute}"
    return None


@lru_cache(maxsize=4096)
def parse_expression(text: str):
    """Parse expression text into a tree. Memoised per distinct text."""
    return _Parser(text).parse()


class NotLiteral(Exception):
    pass


def literal_value(expr) -> Any:
    """The constant an expression denotes, or raise NotLiteral."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, ListExpr):
        return [literal_value(item) for item in expr.items]
    if isinstance(expr, AssocExpr):
        return {key: literal_value(value) for key, value in expr.pairs}
    raise NotLiteral()


def static_literal(text: str) -> tuple[bool, Any]:
    """``(True, value)`` when ``text`` is a pure literal, else ``(False, None)``.

    A number too large for a float raises :class:`NumberRangeError` wherever it
    appears in the text, literal or not.
    """
    try:
        return True, literal_value(parse_expression(text))
    except NumberRangeError:
        raise
    except (EvalError, NotLiteral):
        return False, None
