"""Tests for the indentation-sensitive surface parser."""
import sys
import unittest
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from models.errors import ParseError
from models.kind import Kind
from models.values import Expression, QuoteTemplate
from parsers.source_cleaner import SourceCleaner
from parsers.surface_parser import SPREAD_SPLICE, SpliceMark, build_form, parse_quote, parse_source
from tests.form_corpus import SONNET, fixture_path, load_fixture

GREETER_BLOCK = """\
machine greeter
  provides
    inputs
      name: text, required
  implements
    compute greet
      greeting: "Hello, " + input.name
"""


class ParseSourceTests(unittest.TestCase):
    def test_greeter_listing(self):
        form = parse_source(GREETER_BLOCK)
        self.assertIs(form.kind, Kind.MACHINE)
        self.assertEqual([c.kind for c in form.children], [Kind.PROVIDES, Kind.IMPLEMENTS])
        self.assertEqual(form.count_steps(), 1)
        self.assertEqual(form.get("provides.inputs.name"), Expression("text, required"))

    def test_self_improving_listing(self):
        form = load_fixture("self_improving.mt")
        self.assertEqual(form.count_steps(), 4)
        self.assertEqual(form.get("implements.classify.variant_value"), SONNET)
        self.assertEqual(form.get("implements.classify.task.content"), "Classify this text.")
        self.assertEqual(form.get("implements.classify.returns.confidence"), Expression("number"))

    def test_multiline_field_is_joined(self):
        improvement = load_fixture("self_improving.mt").get("implements.propose.improvement")
        self.assertIsInstance(improvement, Expression)
        self.assertNotIn("\n", improvement.source)
        self.assertTrue(improvement.source.startswith("match classify.confidence < 0.7 {"))
        self.assertTrue(improvement.source.endswith("}"))

    def test_literal_fields_are_values(self):
        form = parse_source(
            "machine m\n  state\n    n: 3\n    s: \"x\"\n    flags: [true, null]\n    cfg: {a: 1.5}\n"
        )
        state = form.section("state")
        self.assertEqual(state.field("n"), 3)
        self.assertEqual(state.field("s"), "x")
        self.assertEqual(list(state.field("flags")), [True, None])
        self.assertEqual(dict(state.field("cfg")), {"a": 1.5})

    def test_comments_blank_lines_and_crlf_are_ignored(self):
        text = "\ufeff# header comment\r\nmachine m   # trailing\r\n\r\n  state\r\n    tag: \"#not-a-comment\"\r\n"
        form = parse_source(text)
        self.assertEqual(form.get("state.tag"), "#not-a-comment")

    def test_splice_free_quote_is_a_form(self):
        text = "machine outer\n  implements\n    compute build\n      template: quote\n" + "".join(
            "        " + line + "\n" for line in GREETER_BLOCK.splitlines()
        )
        template = parse_source(text).get("implements.build.template")
        self.assertEqual(template, parse_source(GREETER_BLOCK))

    def test_quote_with_splices_stays_a_template(self):
        template = load_fixture("builder.mt").get("implements.build.template")
        self.assertIsInstance(template, QuoteTemplate)
        self.assertIn("$(...parts.extras)", template.source)


class ParseErrorTests(unittest.TestCase):
    def assertParseError(self, text: str, kind: str, line: int = None) -> ParseError:
        with self.assertRaises(ParseError) as ctx:
            parse_source(text)
        self.assertEqual(ctx.exception.kind, kind)
        if line is not None:
            self.assertEqual(ctx.exception.line, line)
        return ctx.exception

    def test_skipped_indent_level(self):
        self.assertParseError("machine m\n    compute x\n", "indentation", line=2)

    def test_odd_indentation(self):
        self.assertParseError("machine m\n   implements\n", "indentation", line=2)

    def test_tabs(self):
        self.assertParseError(fixture_path("tabbed.mt").read_text(), "indentation", line=2)

    def test_unknown_keyword(self):
        error = self.assertParseError("machine m\n  bogus\n", "unknown-keyword", line=2)
        self.assertEqual(error.column, 3)

    def test_two_variant_clauses(self):
        self.assertParseError('machine m\n  implements\n    ask a, using: "x", from: "y"\n', "malformed-field", line=3)

    def test_ask_without_variant(self):
        self.assertParseError("machine m\n  implements\n    ask a\n", "structure", line=3)

    def test_non_machine_root(self):
        self.assertParseError("compute x\n  a: 1\n", "structure")

    def test_empty_source(self):
        self.assertParseError("   \n# only a comment\n", "structure")

    def test_illegal_child(self):
        self.assertParseError("machine m\n  compute x\n", "structure", line=2)

    def test_duplicate_step_names(self):
        self.assertParseError(
            "machine m\n  implements\n    compute a\n      x: 1\n    compute a\n      x: 2\n", "structure", line=5
        )

    def test_splice_outside_quote(self):
        self.assertParseError("machine m\n  implements\n    compute a\n      x: *(y)\n", "malformed-splice", line=4)

    def test_unclosed_bracket(self):
        self.assertParseError("machine m\n  state\n    xs: [1, 2\n", "malformed-field", line=3)

    def test_number_out_of_range_is_located(self):
        cases = [
            ("machine m\n  constants\n    big: 1e400\n", 3, 10),
            ('machine m\n  implements\n    compute c\n      x: "a" + 1e400\n', 4, 16),
            ("machine m\n  implements\n    ask a, using: -1e400\n", 3, 19),
        ]
        for source, line, column in cases:
            with self.subTest(line=line):
                error = self.assertParseError(source, "malformed-field", line=line)
                self.assertEqual(error.column, column)
                self.assertIn("out of range", error.message)

    def test_render_uses_file_line_column(self):
        error = self.assertParseError("machine m\n  bogus\n", "unknown-keyword")
        self.assertTrue(error.render("m.mt").startswith("m.mt:2:3: "))


class ParseQuoteTests(unittest.TestCase):
    def test_listing_block_has_no_splices(self):
        node = parse_quote(GREETER_BLOCK)
        self.assertEqual(node.splice_marks(), [])
        self.assertEqual(build_form(node), parse_source(GREETER_BLOCK))

    def test_scalar_splice_in_field_position(self):
        node = parse_quote("compute x\n  greeting: *(g)\n")
        (mark,) = node.splice_marks()
        self.assertIsInstance(mark, SpliceMark)
        self.assertEqual(mark.expression, "g")
        self.assertNotEqual(mark.variant, SPREAD_SPLICE)

    def test_spread_splice_as_child_line(self):
        node = parse_quote("implements\n  $(...steps)\n")
        (mark,) = node.splice_marks()
        self.assertEqual(mark.variant, SPREAD_SPLICE)
        self.assertEqual(mark.expression, "steps")

    def test_quote_is_inert(self):
        node = parse_quote("compute x\n  v: *(form.get(nothing, \"never evaluated\"))\n")
        self.assertEqual(len(node.splice_marks()), 1)

    def test_unbalanced_splice(self):
        with self.assertRaises(ParseError) as ctx:
            parse_quote("implements\n  *(f(x)\n")
        self.assertEqual(ctx.exception.kind, "malformed-splice")

    def test_spread_in_field_position_is_refused(self):
        with self.assertRaises(ParseError) as ctx:
            parse_quote("compute x\n  v: $(...xs)\n")
        self.assertEqual(ctx.exception.kind, "malformed-splice")

    def test_build_without_resolver_refuses_marks(self):
        with self.assertRaises(ParseError):
            build_form(parse_quote("compute x\n  v: *(y)\n"))


class SourceCleanerTests(unittest.TestCase):
    def test_strip_comment_respects_strings(self):
        self.assertEqual(SourceCleaner.strip_comment('x: "a # b" # c'), 'x: "a # b" ')

    def test_bracket_balance_ignores_strings(self):
        self.assertEqual(SourceCleaner.bracket_balance('f("(", [1'), 2)

    def test_logical_lines_join_continuations(self):
        lines = SourceCleaner.logical_lines("a: f(1,\n  2)\nb: 3\n")
        self.assertEqual([line.text for line in lines], ["a: f(1, 2)", "b: 3"])


if __name__ == "__main__":
    unittest.main()
