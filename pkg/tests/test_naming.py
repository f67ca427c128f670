"""Tests for stored-form filename generation.

Filenames are restricted to [A-Za-z0-9_] so they survive any filesystem,
shell, or sync tool without quoting.
"""
import sys
import unittest
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from models.naming import FALLBACK_FILENAME, FILENAME_MAX_LENGTH, form_filename, safe_filename

DIGEST = "0123456789abcdef" * 4


class CharacterSetTests(unittest.TestCase):
    def assertAllowed(self, value: str) -> None:
        self.assertRegex(value, r"\A[A-Za-z0-9_]+\Z")

    def test_every_machine_name_shape_is_allowed(self):
        names = [
            "greeter",
            "self_improving",
            "self-improving",
            "Résumé Screener",
            "@system/runtime/eval",
            "a.b.c",
            "ünïcödé",
        ]

        for name in names:
            with self.subTest(name=name):
                self.assertAllowed(safe_filename(name))

    def test_separators_collapse_to_single_underscores(self):
        self.assertEqual(safe_filename("self-improving"), "Self_Improving")
        self.assertEqual(safe_filename("  spaced   out  "), "Spaced_Out")
        self.assertEqual(safe_filename("@system/runtime/eval"), "System_Runtime_Eval")

    def test_accented_letters_degrade_to_ascii_rather_than_vanishing(self):
        self.assertEqual(safe_filename("Résumé"), "Resume")

    def test_empty_and_symbol_only_names_fall_back(self):
        for name in (None, "", "///", "   "):
            with self.subTest(name=name):
                self.assertEqual(safe_filename(name), FALLBACK_FILENAME)

    def test_long_names_are_capped(self):
        stem = safe_filename("x" * 500)
        self.assertLessEqual(len(stem), FILENAME_MAX_LENGTH)
        self.assertFalse(stem.endswith("_"))


class FormFilenameTests(unittest.TestCase):
    def test_hash_prefix_and_extension_are_appended(self):
        self.assertEqual(form_filename("greeter", DIGEST), "Greeter_0123456789ab.mt")

    def test_extension_can_be_overridden(self):
        self.assertEqual(form_filename("greeter", DIGEST, ".json"), "Greeter_0123456789ab.json")

    def test_versions_of_one_machine_get_distinct_names(self):
        other = "f" * 64
        self.assertNotEqual(form_filename("greeter", DIGEST), form_filename("greeter", other))

    def test_non_digest_is_rejected(self):
        for bad in ("", "abc", DIGEST.upper(), DIGEST + "0"):
            with self.subTest(bad=bad):
                with self.assertRaises(ValueError):
                    form_filename("greeter", bad)


if __name__ == "__main__":
    unittest.main()
