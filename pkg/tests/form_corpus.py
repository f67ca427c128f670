"""Fixture loading and a programmatic corpus of valid machine forms."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from models.form import Form
from models.kind import Kind
from models.policy import PolicyContext
from models.values import Expression
from parsers.surface_parser import parse_source

FIXTURES = Path(__file__).parent / "fixtures"

SONNET = "claude-sonnet-4-6"
OPUS = "claude-opus-4-6"
PROPOSE = "@system/evolution/propose"
EVAL = "@system/runtime/eval"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_fixture(name: str) -> Form:
    return parse_source(fixture_path(name).read_text(encoding="utf-8"))


def permissive_policy(**overrides) -> PolicyContext:
    """All capabilities, both fixture models, budget 100."""
    settings = {"allowed_models": frozenset({SONNET, OPUS})}
    settings.update(overrides)
    return PolicyContext.permissive(**settings)


def compute(name: str, **fields) -> Form:
    return Form(Kind.COMPUTE, name, fields=tuple(fields.items()))


def ask_model(name: str, model: str, task: str = "Answer.", **returns) -> Form:
    children = [Form(Kind.TASK, content=task)]
    if returns:
        children.append(Form(Kind.RETURNS, fields=tuple(returns.items())))
    return Form(Kind.ASK, name, variant=("using", model), children=tuple(children))


def ask_machine(name: str, target: str, **fields) -> Form:
    return Form(Kind.ASK, name, variant=("from", target), fields=tuple(fields.items()))


def machine(name: str, *steps: Form, sections: tuple = ()) -> Form:
    children = list(sections)
    if steps:
        children.append(Form(Kind.IMPLEMENTS, children=tuple(steps)))
    return Form(Kind.MACHINE, name, children=tuple(children))


def _inputs(**declarations) -> Form:
    return Form(Kind.PROVIDES, children=(Form(Kind.INPUTS, fields=tuple(declarations.items())),))


def _governance(**limits) -> Form:
    return Form(Kind.GOVERNANCE, children=(Form(Kind.LIMITS, fields=tuple(limits.items())),))


def corpus() -> list[Form]:
    """Thirty-odd valid forms covering every section, step shape and value type."""
    forms = [
        Form.new(Kind.MACHINE, "empty"),
        machine("one_compute", compute("a", x=1)),
        machine("two_computes", compute("a", x=1), compute("b", y=Expression("a.x + 1"))),
        machine("strings", compute("s", greeting="Hello", empty="")),
        machine("unicode", compute("s", text="héllo wörld ✓", quote='say "hi"')),
        machine("numbers", compute("n", i=0, neg=-3, f=2.5, big=10 ** 12)),
        machine("booleans", compute("b", yes=True, no=False)),
        machine("nulls", compute("z", nothing=None)),
        machine("lists", compute("l", xs=[1, 2, 3], empty=[], nested=[[1], ["a"]])),
        machine("assocs", compute("m", cfg={"a": 1, "b": [True, None]}, empty={})),
        machine("exprs", compute("e", sum=Expression("1 + 2"), cmp=Expression("3 < 4"))),
        machine("match_expr", compute("m", v=Expression('match 1 { case 1 => "one" case _ => "other" }'))),
        machine("reflecting", compute("r", me=Expression("reflect()"))),
        machine("builtin_call", compute("c", kind=Expression("form.kind(reflect())"))),
        machine("one_ask", ask_model("classify", SONNET, confidence=Expression("number"))),
        machine("ask_opus", ask_model("classify", OPUS, "Classify this text.", label=Expression("text"))),
        machine("two_models", ask_model("a", SONNET), ask_model("b", OPUS)),
        machine("same_model_twice", ask_model("a", SONNET), ask_model("b", SONNET)),
        machine("proposer", ask_machine("evolve", PROPOSE, evidence={"confidence": 0.5})),
        machine("evaluator", ask_machine("nested", EVAL)),
        machine(
            "mixed",
            compute("introspect", my_form=Expression("reflect()")),
            ask_model("classify", SONNET, confidence=Expression("number")),
            ask_machine("evolve", PROPOSE, definition=Expression("introspect.my_form")),
        ),
        machine("with_inputs", compute("g", out=Expression("input.name")),
                sections=(_inputs(name=Expression("text, required")),)),
        machine("optional_input", compute("g", out=1), sections=(_inputs(note=Expression("text")),)),
        machine("governed", compute("a", x=1), sections=(_governance(max_cost=10),)),
        machine("outputs", compute("a", x=1), sections=(
            Form(Kind.PROVIDES, children=(Form(Kind.OUTPUTS, fields=(("x", Expression("number")),)),)),
        )),
        machine("requires", sections=(Form(Kind.REQUIRES, children=(Form(Kind.INPUTS, fields=(("k", 1),)),)),)),
        machine("state_constants", sections=(
            Form(Kind.STATE, fields=(("counter", 0),)),
            Form(Kind.CONSTANTS, fields=(("pi", 3.14),)),
        )),
        machine("metadata", sections=(Form(Kind.METADATA, fields=(("author", "ops"), ("version", 2))),)),
        machine("tests_section", sections=(Form(Kind.TESTS, content="smoke"),)),
        machine("multiline_content", ask_model("a", SONNET, "line one\nline two")),
        machine("quoted_form", compute("q", template=Form.new(Kind.MACHINE, "inner"))),
        machine("hyphen-name", compute("step-one", x=1)),
        machine("many_steps", *(compute(f"s{i}", v=i) for i in range(12))),
        machine(
            "full",
            compute("a", x=1),
            ask_model("b", SONNET, ok=Expression("boolean")),
            sections=(_inputs(q=Expression("text")), _governance(budget=5)),
        ),
    ]
    return forms


def named(name: str) -> Form:
    return next(form for form in corpus() if form.name == name)
