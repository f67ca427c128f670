"""Tests for structural diff and patch application."""
import sys
import unittest
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from models.form import Form
from models.form_diff import EMPTY_DIFF, apply_diff, diff
from models.kind import Kind
from models.transform import add_child, remove_child, set_value
from tests.form_corpus import OPUS, SONNET, compute, corpus, load_fixture, machine


class DiffTests(unittest.TestCase):
    def setUp(self):
        self.greeter = load_fixture("greeter.mt")
        self.improving = load_fixture("self_improving.mt")

    def test_identical_forms_have_empty_diff(self):
        self.assertEqual(len(diff(self.greeter, self.greeter)), 0)
        self.assertFalse(diff(self.improving, load_fixture("self_improving.mt")))

    def test_model_swap_is_one_modified_entry(self):
        opus = set_value(self.improving, "implements.classify.variant_value", OPUS)
        change = diff(self.improving, opus)
        self.assertEqual(len(change), 1)
        entry = change.entries[0]
        self.assertEqual(entry.path, "implements.classify.variant_value")
        self.assertEqual(entry.op, "modified")
        self.assertEqual(entry.target, "attribute")
        self.assertEqual(entry.before, SONNET)
        self.assertEqual(entry.after, OPUS)

    def test_root_rename(self):
        renamed = set_value(self.greeter, "name", "welcomer")
        change = diff(self.greeter, renamed)
        self.assertEqual(change.paths(), ["name"])
        self.assertEqual(change.entries[0].op, "modified")

    def test_added_and_removed_steps(self):
        grown = add_child(self.greeter, "implements", compute("farewell", text="bye"))
        added = diff(self.greeter, grown)
        self.assertEqual([(e.path, e.op, e.target) for e in added], [("implements.farewell", "added", "child")])

        removed = diff(grown, self.greeter)
        self.assertEqual([(e.path, e.op) for e in removed], [("implements.farewell", "removed")])

    def test_field_changes(self):
        a = machine("m", compute("s", x=1, y=2))
        b = machine("m", compute("s", x=1, y=3, z=4))
        change = diff(a, b)
        self.assertEqual(
            [(e.path, e.op) for e in change],
            [("implements.s.y", "modified"), ("implements.s.z", "added")],
        )

    def test_reordered_children_replace_the_parent(self):
        a = machine("m", compute("a", x=1), compute("b", x=2))
        b = machine("m", compute("b", x=2), compute("a", x=1))
        change = diff(a, b)
        self.assertEqual(len(change), 1)
        self.assertEqual(change.entries[0].path, "implements")
        self.assertEqual(change.entries[0].target, "form")

    def test_kind_change_replaces_the_whole_form(self):
        a = Form.new(Kind.MACHINE, "m")
        b = Form.new(Kind.PROVIDES)
        change = diff(a, b)
        self.assertEqual([(e.path, e.op, e.target) for e in change], [("", "modified", "form")])


class ApplyDiffTests(unittest.TestCase):
    def test_apply_empty_diff_is_identity(self):
        greeter = load_fixture("greeter.mt")
        self.assertEqual(apply_diff(greeter, EMPTY_DIFF), greeter)

    def test_apply_reconstructs_target_for_fixture_pairs(self):
        pairs = [
            (load_fixture("self_improving.mt"), load_fixture("self_improving_opus.mt")),
            (load_fixture("greeter.mt"), remove_child(load_fixture("greeter.mt"), "implements.greet")),
            (load_fixture("greeter.mt"), load_fixture("greeter_anon.mt")),
            (load_fixture("empty.mt"), load_fixture("builder.mt")),
        ]
        for a, b in pairs:
            with self.subTest(a=a.name, b=b.name):
                self.assertEqual(apply_diff(a, diff(a, b)), b)
                self.assertEqual(apply_diff(b, diff(b, a)), a)

    def test_apply_reconstructs_across_corpus(self):
        forms = corpus()
        for a, b in zip(forms, forms[1:] + forms[:1]):
            with self.subTest(a=a.name, b=b.name):
                self.assertEqual(apply_diff(a, diff(a, b)), b)


if __name__ == "__main__":
    unittest.main()
