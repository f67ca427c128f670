"""The form standard library: the builtins expressions may call.

Each entry maps a ``form.*`` name to a function and its accepted arity.
Results are plain Values (lists, associations, forms) so they can flow back
into expressions and step results.
"""
import sys
from pathlib import Path
from typing import Any, Callable

# Handle imports for both module and direct execution
try:
    from ..models.capability import render_caps
    from ..models.errors import EvalError
    from ..models.form import Form, thaw_value
    from ..models.form_diff import diff as form_diff
    from ..models.transform import add_child, merge, remove_child, replace_child, set_value
    from ..models.values import ABSENT, type_word
    from ..parsers.surface_parser import parse_source
    from ..writers.form_json import from_json, to_json
    from ..writers.form_text import form_hash, to_text
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.capability import render_caps
    from models.errors import EvalError
    from models.form import Form, thaw_value
    from models.form_diff import diff as form_diff
    from models.transform import add_child, merge, remove_child, replace_child, set_value
    from models.values import ABSENT, type_word
    from parsers.surface_parser import parse_source
    from writers.form_json import from_json, to_json
    from writers.form_text import form_hash, to_text


def _form(value: Any, position: int, name: str) -> Form:
    if not isinstance(value, Form):
        raise EvalError(
            f"{name} argument {position} must be a form, got {type_word(value)}", code="type-mismatch"
        )
    return value


def _text(value: Any, position: int, name: str) -> str:
    if not isinstance(value, str):
        raise EvalError(
            f"{name} argument {position} must be text, got {type_word(value)}", code="type-mismatch"
        )
    return value


def _new(kind, name=None):
    return Form.new(_text(kind, 1, "form.new"), name)


def _get(form, path):
    value = _form(form, 1, "form.get").get(_text(path, 2, "form.get"))
    return None if value is ABSENT else thaw_value(value)


def _set(form, path, value):
    return set_value(_form(form, 1, "form.set"), _text(path, 2, "form.set"), value)


def _add(form, path, child):
    return add_child(_form(form, 1, "form.add"), _text(path, 2, "form.add"), _form(child, 3, "form.add"))


def _remove(form, path):
    return remove_child(_form(form, 1, "form.remove"), _text(path, 2, "form.remove"))


def _replace(form, path, child):
    return replace_child(
        _form(form, 1, "form.replace"), _text(path, 2, "form.replace"), _form(child, 3, "form.replace")
    )


def _merge(base, overlay):
    return merge(_form(base, 1, "form.merge"), _form(overlay, 2, "form.merge"))


def _diff(a, b):
    return [
        {
            "path": entry.path,
            "op": entry.op,
            "before": thaw_value(entry.before),
            "after": thaw_value(entry.after),
        }
        for entry in form_diff(_form(a, 1, "form.diff"), _form(b, 2, "form.diff"))
    ]


def _validate(form):
    return [{"path": v.path, "rule": v.rule} for v in _form(form, 1, "form.validate").validate()]


def _step_types(form):
    counts = _form(form, 1, "form.step_types").step_types()
    return {kind.value: counts[kind] for kind in sorted(counts, key=lambda kind: kind.value)}


def _section(form, verb):
    return _form(form, 1, "form.section").section(_text(verb, 2, "form.section"))


def _step(form, name):
    return _form(form, 1, "form.step").step(_text(name, 2, "form.step"))


def _find_all(form, kind):
    return _form(form, 1, "form.find_all").find_all(_text(kind, 2, "form.find_all"))


def _from_json(text):
    return from_json(_text(text, 1, "form.from_json"))


# name -> (function, min arity, max arity)
BUILTINS: dict[str, tuple[Callable, int, int]] = {
    "form.new": (_new, 1, 2),
    "form.get": (_get, 2, 2),
    "form.set": (_set, 3, 3),
    "form.add": (_add, 3, 3),
    "form.remove": (_remove, 2, 2),
    "form.replace": (_replace, 3, 3),
    "form.merge": (_merge, 2, 2),
    "form.diff": (_diff, 2, 2),
    "form.validate": (_validate, 1, 1),
    "form.steps": (lambda f: _form(f, 1, "form.steps").steps(), 1, 1),
    "form.count_steps": (lambda f: _form(f, 1, "form.count_steps").count_steps(), 1, 1),
    "form.step_types": (_step_types, 1, 1),
    "form.capabilities": (lambda f: render_caps(_form(f, 1, "form.capabilities").capabilities()), 1, 1),
    "form.to_text": (lambda f: to_text(_form(f, 1, "form.to_text")), 1, 1),
    "form.from_text": (lambda s: parse_source(_text(s, 1, "form.from_text")), 1, 1),
    "form.to_json": (lambda f: to_json(_form(f, 1, "form.to_json")), 1, 1),
    "form.from_json": (_from_json, 1, 1),
    "form.hash": (lambda f: form_hash(_form(f, 1, "form.hash")), 1, 1),
    "form.kind": (lambda f: _form(f, 1, "form.kind").kind.value, 1, 1),
    "form.name": (lambda f: _form(f, 1, "form.name").name, 1, 1),
    "form.children": (lambda f: list(_form(f, 1, "form.children").children), 1, 1),
    "form.section": (_section, 2, 2),
    "form.step": (_step, 2, 2),
    "form.find_all": (_find_all, 2, 2),
}


def dispatch(name: str, args: list) -> Any:
    try:
        function, low, high = BUILTINS[name]
    except KeyError:
        raise EvalError(f"unknown builtin {name!r}", code="unknown-builtin") from None
    if not low <= len(args) <= high:
        expected = str(low) if low == high else f"{low}-{high}"
        raise EvalError(
            f"{name} takes {expected} argument(s), got {len(args)}", code="arity-mismatch"
        )
    return function(*args)
