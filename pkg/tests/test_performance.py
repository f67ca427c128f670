"""Timing checks for construction, inspection and hashing.

Medians over 10,000 iterations, allowed ten times the target: construction
10 us, inspecting a 50-node form 1 ms, hashing 200 us.
"""
import statistics
import sys
import time
import unittest
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from engine.inspector import inspect_form
from models.form import Form
from models.values import Expression
from tests.form_corpus import compute, machine, permissive_policy
from writers.form_text import form_hash

ITERATIONS = 10_000
TOLERANCE = 10


def _median_seconds(action) -> float:
    samples = []
    for _ in range(ITERATIONS):
        start = time.perf_counter()
        action()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def _fifty_node_form() -> Form:
    steps = [compute(f"step_{i}", value=i, text=Expression(f"step_{max(i - 1, 0)}.value + 1")) for i in range(48)]
    form = machine("fifty", *steps)
    assert sum(1 for _ in form.walk()) == 50
    return form


class PerformanceTests(unittest.TestCase):
    def test_construction(self):
        median = _median_seconds(lambda: Form.new("machine", "m"))
        self.assertLess(median, 10e-6 * TOLERANCE)

    def test_inspection_of_fifty_nodes(self):
        form = _fifty_node_form()
        pi = permissive_policy()
        median = _median_seconds(lambda: inspect_form(form, pi, "untrusted"))
        self.assertLess(median, 1e-3 * TOLERANCE)

    def test_hashing(self):
        form = _fifty_node_form()
        median = _median_seconds(lambda: form_hash(form))
        self.assertLess(median, 200e-6 * TOLERANCE)


if __name__ == "__main__":
    unittest.main()
