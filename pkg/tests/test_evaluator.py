"""Tests for pure expression evaluation and quote instantiation."""
import sys
import unittest
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from engine.evaluator import Env, call_builtin, eval_value, evaluate, instantiate_quote
from models.directive import DirectiveLog
from models.errors import EvalError, NumberRangeError, ParseError
from models.form import Form
from models.kind import Kind
from models.values import Expression
from parsers.expr_parser import static_literal
from parsers.surface_parser import parse_source
from tests.form_corpus import OPUS, SONNET, load_fixture
from writers.form_text import form_hash


class ExpressionTests(unittest.TestCase):
    def setUp(self):
        self.log = DirectiveLog()
        self.env = Env({"input": {"name": "World", "n": 2}, "classify": {"confidence": 0.5}})

    def eval(self, text: str):
        return evaluate(text, self.env, self.log)

    def test_greeting(self):
        self.assertEqual(self.eval('"Hello, " + input.name'), "Hello, World")

    def test_arithmetic_and_concatenation(self):
        self.assertEqual(self.eval("1 + 2 + 3"), 6)
        self.assertEqual(self.eval('"n=" + input.n'), "n=2")
        self.assertEqual(self.eval('1.5 + "x"'), "1.5x")

    def test_comparisons(self):
        self.assertIs(self.eval("classify.confidence < 0.7"), True)
        self.assertIs(self.eval("input.n >= 3"), False)
        self.assertIs(self.eval('"a" < "b"'), True)
        self.assertIs(self.eval("1 == true"), False)
        self.assertIs(self.eval("[1, {a: null}] == [1, {a: null}]"), True)

    def test_literals(self):
        self.assertEqual(self.eval("[1, true, null]"), [1, True, None])
        self.assertEqual(self.eval('{a: 1, "b c": [2]}'), {"a": 1, "b c": [2]})

    def test_match(self):
        text = 'match input.n { case 1 => "one" case 2 => "two" case _ => "many" }'
        self.assertEqual(self.eval(text), "two")
        self.assertEqual(self.eval('match 9 { case 1 => "one" case _ => "many" }'), "many")

    def test_match_without_matching_case(self):
        with self.assertRaises(EvalError) as ctx:
            self.eval('match 3 { case 1 => "one" }')
        self.assertEqual(ctx.exception.code, "no-case-matched")

    def test_unbound_identifier(self):
        with self.assertRaises(EvalError) as ctx:
            self.eval("missing + 1")
        self.assertEqual(ctx.exception.code, "unbound-identifier")

    def test_missing_key(self):
        with self.assertRaises(EvalError) as ctx:
            self.eval("input.age")
        self.assertEqual(ctx.exception.code, "unbound-identifier")

    def test_type_mismatch(self):
        for text in ("1 + true", "[1] + [2]", "1 < \"a\"", "input.name.first"):
            with self.subTest(text=text):
                with self.assertRaises(EvalError) as ctx:
                    self.eval(text)
                self.assertEqual(ctx.exception.code, "type-mismatch")

    def test_syntax_errors(self):
        for text in ("1 +", "a < b < c", "(1", "{a: 1, a: 2}", "f(1)(2)"):
            with self.subTest(text=text):
                with self.assertRaises(EvalError) as ctx:
                    self.eval(text)
                self.assertEqual(ctx.exception.code, "syntax-error")

    def test_numbers_must_be_finite(self):
        with self.assertRaises(NumberRangeError) as ctx:
            static_literal("1e400")
        self.assertEqual(ctx.exception.position, 0)
        with self.assertRaises(EvalError) as ctx:
            self.eval('"a" + 1e400')
        self.assertEqual(ctx.exception.code, "number-out-of-range")
        with self.assertRaises(EvalError) as ctx:
            self.eval('"n=" + (1e308 + 1e308)')
        self.assertEqual(ctx.exception.code, "type-mismatch")

    def test_reflect_needs_a_running_machine(self):
        with self.assertRaises(EvalError) as ctx:
            self.eval("reflect()")
        self.assertEqual(ctx.exception.code, "unbound-identifier")

    def test_reflect_returns_bound_form(self):
        greeter = load_fixture("greeter.mt")
        env = Env(reflect=greeter)
        self.assertEqual(evaluate("reflect()", env, self.log), greeter)
        self.assertEqual(evaluate("form.count_steps(reflect())", env, self.log), 1)

    def test_evaluation_never_grows_the_log(self):
        for text in ('"Hello, " + input.name', "[1, 2]", 'form.new("machine", "x")'):
            self.eval(text)
        self.assertEqual(len(self.log), 0)


class BuiltinTests(unittest.TestCase):
    def setUp(self):
        self.log = DirectiveLog()
        self.improving = load_fixture("self_improving.mt")
        self.env = Env({"f": self.improving})

    def test_form_set_matches_the_opus_fixture(self):
        text = 'form.set(f, "implements.classify.variant_value", "claude-opus-4-6")'
        changed = evaluate(text, self.env, self.log)
        self.assertEqual(form_hash(changed), form_hash(load_fixture("self_improving_opus.mt")))

    def test_form_get_missing_is_null(self):
        self.assertIsNone(evaluate('form.get(f, "implements.nothing")', self.env, self.log))
        self.assertEqual(evaluate('form.get(f, "implements.classify.variant_value")', self.env, self.log), SONNET)

    def test_inspection_builtins(self):
        self.assertEqual(evaluate("form.step_types(f)", self.env, self.log), {"ask": 2, "compute": 2})
        self.assertEqual(
            evaluate("form.capabilities(f)", self.env, self.log),
            ["call:@system/evolution/propose", f"model:{SONNET}"],
        )
        self.assertEqual(evaluate("form.kind(f)", self.env, self.log), "machine")
        self.assertEqual(evaluate("form.validate(f)", self.env, self.log), [])

    def test_form_diff_builtin(self):
        env = Env({"a": self.improving, "b": load_fixture("self_improving_opus.mt")})
        (entry,) = evaluate("form.diff(a, b)", env, self.log)
        self.assertEqual(entry["path"], "implements.classify.variant_value")
        self.assertEqual(entry["after"], OPUS)

    def test_text_round_trip_builtins(self):
        self.assertEqual(evaluate("form.from_text(form.to_text(f))", self.env, self.log), self.improving)
        self.assertEqual(evaluate("form.from_json(form.to_json(f))", self.env, self.log), self.improving)

    def test_unknown_builtin_and_arity(self):
        with self.assertRaises(EvalError) as ctx:
            call_builtin("form.explode", [], self.log)
        self.assertEqual(ctx.exception.code, "unknown-builtin")
        with self.assertRaises(EvalError) as ctx:
            call_builtin("form.get", [self.improving], self.log)
        self.assertEqual(ctx.exception.code, "arity-mismatch")

    def test_argument_types_are_checked(self):
        with self.assertRaises(EvalError) as ctx:
            call_builtin("form.count_steps", ["not a form"], self.log)
        self.assertEqual(ctx.exception.code, "type-mismatch")


class QuoteTests(unittest.TestCase):
    def setUp(self):
        self.log = DirectiveLog()

    def test_scalar_splice_evaluates_once(self):
        form = instantiate_quote("compute x\n  greeting: *(g)\n", Env({"g": 7}), self.log)
        self.assertEqual(form, Form(Kind.COMPUTE, "x", fields=(("greeting", 7),)))

    def test_splice_free_quote_equals_parsed_form(self):
        source = "machine greeter\n  implements\n    compute greet\n      greeting: \"Hi\"\n"
        self.assertEqual(instantiate_quote(source, Env(), self.log), parse_source(source))
        self.assertEqual(len(self.log), 0)

    def test_builder_template_splices_in_order(self):
        template = load_fixture("builder.mt").get("implements.build.template")
        extras = [Form.new("compute", "first_extra"), Form.new("compute", "second_extra")]
        env = Env({"parts": {"label": "greet", "shout": Form.new("compute", "shout"), "extras": extras}})
        built = instantiate_quote(template, env, self.log)
        self.assertEqual(built.name, "generated")
        self.assertEqual(
            [step.name for step in built.steps()], ["greet", "shout", "first_extra", "second_extra"]
        )
        self.assertEqual(built.get("implements.greet.greeting"), "greet")

    def test_spread_of_non_forms_is_refused(self):
        with self.assertRaises(EvalError) as ctx:
            instantiate_quote("implements\n  $(...xs)\n", Env({"xs": [1, 2]}), self.log)
        self.assertEqual(ctx.exception.code, "splice-type-mismatch")

    def test_child_splice_must_be_a_form(self):
        with self.assertRaises(EvalError) as ctx:
            instantiate_quote("implements\n  *(x)\n", Env({"x": "text"}), self.log)
        self.assertEqual(ctx.exception.code, "splice-type-mismatch")

    def test_empty_spread_adds_nothing(self):
        form = instantiate_quote("implements\n  $(...xs)\n", Env({"xs": []}), self.log)
        self.assertEqual(form.children, ())

    def test_malformed_template(self):
        with self.assertRaises(ParseError):
            instantiate_quote("implements\n  *(x\n", Env({"x": 1}), self.log)


class EvalValueTests(unittest.TestCase):
    def test_stored_values(self):
        log = DirectiveLog()
        env = Env({"a": {"x": 1}})
        self.assertEqual(eval_value(Expression("a.x + 1"), env, log), 2)
        self.assertEqual(eval_value((1, 2), env, log), [1, 2])
        self.assertEqual(eval_value("plain", env, log), "plain")
        greeter = load_fixture("greeter.mt")
        self.assertIs(eval_value(greeter, env, log), greeter)


if __name__ == "__main__":
    unittest.main()
