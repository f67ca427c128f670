"""Expression syntax tree.

Nodes are frozen dataclasses so a parsed expression can be cached and shared
between runs. The parser lives in :mod:`parsers.expr_parser`, evaluation in
:mod:`engine.evaluator`.
"""
from dataclasses import dataclass
from typing import Any, Union


@dataclass(frozen=True)
class Literal:
    value: Any


@dataclass(frozen=True)
class ListExpr:
    items: tuple


@dataclass(frozen=True)
class AssocExpr:
    # ordered (key, Expr) pairs
    pairs: tuple


@dataclass(frozen=True)
class Name:
    identifier: str


@dataclass(frozen=True)
class Access:
    base: "Expr"
    attribute: str


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class Case:
    pattern: Union[Literal, Wildcard]
    body: "Expr"


@dataclass(frozen=True)
class Match:
    scrutinee: "Expr"
    cases: tuple

    def __post_init__(self):
        if not self.cases:
            raise ValueError("match needs at least one case")


@dataclass(frozen=True)
class Call:
    """A call into the form standard library, e.g. ``form.set(f, p, v)``."""

    builtin: str
    args: tuple


@dataclass(frozen=True)
class Reflect:
    """``reflect()``: the running machine's own form."""


@dataclass(frozen=True)
class QuoteExpr:
    """A quote template awaiting instantiation; holds a QuoteTemplate."""

    template: Any


Expr = Union[Literal, ListExpr, AssocExpr, Name, Access, Binary, Match, Call, Reflect, QuoteExpr]
