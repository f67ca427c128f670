"""Pure evaluation of field expressions and quote templates.

Every entry point takes the caller's :class:`DirectiveLog` and checks on the
way out that it did not grow. Nothing here can emit a directive, so a
``PurityViolation`` means a bug elsewhere has leaked an effect into the
pure fragment.
"""
import sys
from collections.abc import Mapping
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Optional, Union

# Handle imports for both module and direct execution
try:
    from ..models.directive import DirectiveLog
    from ..models.errors import EvalError, PurityViolation
    from ..models.expr import (
        Access, AssocExpr, Binary, Call, ListExpr, Literal, Match, Name,
        QuoteExpr, Reflect, Wildcard,
    )
    from ..models.form import Form, thaw_value
    from ..models.values import (
        ABSENT, Expression, QuoteTemplate, format_number, is_number, type_word,
        values_equal,
    )
    from ..parsers.expr_parser import parse_expression
    from ..parsers.surface_parser import (
        SPREAD_SPLICE, SourceNode, SpliceMark, build_form, parse_quote,
    )
    from . import stdlib
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.directive import DirectiveLog
    from models.errors import EvalError, PurityViolation
    from models.expr import (
        Access, AssocExpr, Binary, Call, ListExpr, Literal, Match, Name,
        QuoteExpr, Reflect, Wildcard,
    )
    from models.form import Form, thaw_value
    from models.values import (
        ABSENT, Expression, QuoteTemplate, format_number, is_number, type_word,
        values_equal,
    )
    from parsers.expr_parser import parse_expression
    from parsers.surface_parser import (
        SPREAD_SPLICE, SourceNode, SpliceMark, build_form, parse_quote,
    )
    from engine import stdlib


class Env:
    """Identifier bindings for one evaluation scope.

    ``reflect`` holds the running machine's own form; ``reflect()`` is an
    error when nothing is bound.
    """

    def __init__(self, bindings: Optional[Mapping] = None, reflect: Optional[Form] = None):
        self.bindings: dict = dict(bindings or {})
        self.reflect = reflect

    def lookup(self, identifier: str) -> Any:
        try:
            return self.bindings[identifier]
        except KeyError:
            raise EvalError(f"unbound identifier {identifier!r}", code="unbound-identifier") from None

    def bind(self, identifier: str, value: Any) -> None:
        self.bindings[identifier] = value


# ----------------------------------------------------------------------
# Entry points
# ----------------------------------------------------------------------


def evaluate(expr: Any, env: Env, log: DirectiveLog) -> Any:
    """Evaluate an expression tree, expression text or ``Expression``."""
    if isinstance(expr, (str, Expression)):
        expr = parse_expression(str(expr))
    with _pure(log):
        return _eval(expr, env, log)


def eval_value(value: Any, env: Env, log: DirectiveLog) -> Any:
    """Evaluate a stored field Value.

    Raw expression text is evaluated, a quote template is instantiated, and
    every other Value (literals, forms) is already its own result.
    """
    if isinstance(value, Expression):
        return evaluate(value, env, log)
    if isinstance(value, QuoteTemplate):
        return instantiate_quote(value, env, log)
    return thaw_value(value)


def instantiate_quote(template: Union[QuoteTemplate, SourceNode, str], env: Env, log: DirectiveLog) -> Form:
    """Fill every splice site of ``template`` from ``env``.

    Field splices take any value; a child splice must yield a form and a
    spread splice a list of forms, inserted in order as siblings.
    """
    node = template if isinstance(template, SourceNode) else parse_quote(str(template))
    child_marks = {id(mark) for mark in _child_marks(node)}

    def resolve(mark: SpliceMark) -> Any:
        value = evaluate(mark.expression, env, log)
        if mark.variant == SPREAD_SPLICE:
            if not isinstance(value, (list, tuple)) or not all(isinstance(item, Form) for item in value):
                raise EvalError(
                    f"spread splice $(...{mark.expression}) must yield a list of forms, got {type_word(value)}",
                    code="splice-type-mismatch",
                )
            return list(value)
        if id(mark) in child_marks and not isinstance(value, Form):
            raise EvalError(
                f"child splice *({mark.expression}) must yield a form, got {type_word(value)}",
                code="splice-type-mismatch",
            )
        return value

    with _pure(log):
        return build_form(node, resolve)


def call_builtin(name: str, args: Iterable[Any], log: DirectiveLog) -> Any:
    """Dispatch a form standard library call by name."""
    with _pure(log):
        return stdlib.dispatch(name, list(args))


# ----------------------------------------------------------------------
# Tree walking
# ----------------------------------------------------------------------


def _eval(expr: Any, env: Env, log: DirectiveLog) -> Any:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Name):
        return env.lookup(expr.identifier)
    if isinstance(expr, Access):
        return _access(_eval(expr.base, env, log), expr.attribute)
    if isinstance(expr, Binary):
        return _binary(expr.op, _eval(expr.lhs, env, log), _eval(expr.rhs, env, log))
    if isinstance(expr, Match):
        return _match(expr, env, log)
    if isinstance(expr, Call):
        args = [_eval(arg, env, log) for arg in expr.args]
        return stdlib.dispatch(expr.builtin, args)
    if isinstance(expr, ListExpr):
        return [_eval(item, env, log) for item in expr.items]
    if isinstance(expr, AssocExpr):
        return {key: _eval(value, env, log) for key, value in expr.pairs}
    if isinstance(expr, Reflect):
        if env.reflect is None:
            raise EvalError("reflect() outside a running machine", code="unbound-identifier")
        return env.reflect
    if isinstance(expr, QuoteExpr):
        return instantiate_quote(expr.template, env, log)
    raise EvalError(f"not an expression: {expr!r}", code="type-mismatch")


def _access(base: Any, attribute: str) -> Any:
    if isinstance(base, Form):
        value = base.get(attribute)
        if value is ABSENT:
            raise EvalError(f"form has no {attribute!r}", code="unbound-identifier")
        return thaw_value(value)
    if isinstance(base, Mapping):
        if attribute not in base:
            raise EvalError(f"no key {attribute!r} in association", code="unbound-identifier")
        return thaw_value(base[attribute])
    raise EvalError(f"cannot read .{attribute} of a {type_word(base)}", code="type-mismatch")


def _binary(op: str, lhs: Any, rhs: Any) -> Any:
    if op == "==":
        return values_equal(lhs, rhs)
    if op == "!=":
        return not values_equal(lhs, rhs)
    if op == "+":
        if is_number(lhs) and is_number(rhs):
            return lhs + rhs
        if isinstance(lhs, str) and isinstance(rhs, str):
            return lhs + rhs
        if isinstance(lhs, str) and is_number(rhs):
            return lhs + format_number(rhs)
        if is_number(lhs) and isinstance(rhs, str):
            return format_number(lhs) + rhs
        raise _mismatch(op, lhs, rhs)

    if (is_number(lhs) and is_number(rhs)) or (isinstance(lhs, str) and isinstance(rhs, str)):
        if op == "<":
            return lhs < rhs
        if op == ">":
            return lhs > rhs
        if op == "<=":
            return lhs <= rhs
        if op == ">=":
            return lhs >= rhs
    raise _mismatch(op, lhs, rhs)


def _match(expr: Match, env: Env, log: DirectiveLog) -> Any:
    scrutinee = _eval(expr.scrutinee, env, log)
    for case in expr.cases:
        if isinstance(case.pattern, Wildcard) or values_equal(case.pattern.value, scrutinee):
            return _eval(case.body, env, log)
    raise EvalError(f"no case matched {type_word(scrutinee)} value", code="no-case-matched")


def _mismatch(op: str, lhs: Any, rhs: Any) -> EvalError:
    return EvalError(
        f"cannot apply {op!r} to {type_word(lhs)} and {type_word(rhs)}", code="type-mismatch"
    )


def _child_marks(node: SourceNode) -> list[SpliceMark]:
    marks = []
    for child in node.children:
        if isinstance(child, SpliceMark):
            marks.append(child)
        else:
            marks.extend(_child_marks(child))
    return marks


@contextmanager
def _pure(log: DirectiveLog):
    """Raise if the log grew while the block ran."""
    before = len(log)
    yield
    if len(log) != before:
        raise PurityViolation(f"pure evaluation appended {len(log) - before} directive(s)")
