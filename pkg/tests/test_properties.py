"""Property tests: purity and determinism of evaluation, one decision per
materialization, round-trips, total and monotone inspection, capability
enumeration, hash stability, trace containment, safe sequential composition
and the closed set of directive kinds."""
import sys
import unittest
from pathlib import Path

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from engine.evaluator import Env, call_builtin, evaluate
from engine.governance import LedgerRef, Registry, audit_no_bypass, materialize, verify_ledger
from engine.inspector import inspect_form
from engine.providers import MockProvider
from engine.runtime import RunRequest, run
from models.capability import CapabilityAtom
from models.decision import CHECK_NAMES
from models.directive import RUNTIME_KINDS, DirectiveKind, DirectiveLog, observed_kinds
from models.errors import FormError, KernelError, RunError
from models.form import Form
from models.form_diff import apply_diff, diff
from models.kind import Kind
from models.transform import set_value
from parsers.surface_parser import parse_source
from tests.form_corpus import fixture_path, load_fixture, permissive_policy
from tests.strategies import (
    EXPRESSION_ENV, MODELS, any_forms, expression_texts, identifiers, machine_forms, modes, named_forms, policies,
    scalars, stricter_policies, trust_levels, values,
)
from writers.form_json import from_json, to_json
from writers.form_text import form_hash, render_text, to_text

SLOW = [HealthCheck.too_slow, HealthCheck.data_too_large]


def _op_print(form, log):
    return parse_source(to_text(form))


def _op_json(form, log):
    return from_json(to_json(form))


def _op_rename(form, log):
    renamed = set_value(form, "name", "renamed")
    return apply_diff(form, diff(form, renamed))


def _op_inspect(form, log):
    inspect_form(form, permissive_policy(), "untrusted")
    return form


def _op_builtins(form, log):
    call_builtin("form.count_steps", [form], log)
    call_builtin("form.capabilities", [form], log)
    return call_builtin("form.set", [form, "name", "via_builtin"], log)


def _op_reflect(form, log):
    evaluate("form.step_types(reflect())", Env(reflect=form), log)
    return evaluate('form.merge(reflect(), form.new("machine", "overlay"))', Env(reflect=form), log)


def _op_analyse(form, log):
    form.validate()
    form.walk()
    form_hash(form)
    return form


PURE_OPS = [_op_print, _op_json, _op_rename, _op_inspect, _op_builtins, _op_reflect, _op_analyse]


class PurityProperties(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.registry = Registry()
        materialize(cls.registry, load_fixture("greeter.mt"), permissive_policy(), "untrusted", "eval")

    @settings(max_examples=500, deadline=None, suppress_health_check=SLOW)
    @given(form=machine_forms(), ops=st.lists(st.sampled_from(PURE_OPS), max_size=6))
    def test_form_operations_emit_nothing(self, form, ops):
        log = DirectiveLog()
        machines = self.registry.machine_count
        decisions = len(self.registry.decisions)
        for op in ops:
            try:
                form = op(form, log)
            except KernelError:
                pass
        self.assertEqual(len(log), 0)
        self.assertEqual(self.registry.machine_count, machines)
        self.assertEqual(len(self.registry.decisions), decisions)


class ExpressionPurityProperties(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.greeter = load_fixture("greeter.mt")

    def outcome(self, text, log):
        try:
            return "ok", evaluate(text, Env(EXPRESSION_ENV, reflect=self.greeter), log)
        except KernelError as e:
            return "error", e.code

    @settings(max_examples=10_000, deadline=None, suppress_health_check=SLOW)
    @given(text=expression_texts)
    def test_evaluation_emits_nothing(self, text):
        log = DirectiveLog()
        self.outcome(text, log)
        self.assertEqual(len(log), 0)

    @settings(max_examples=500, deadline=None, suppress_health_check=SLOW)
    @given(text=expression_texts)
    def test_evaluation_is_deterministic(self, text):
        self.assertEqual(self.outcome(text, DirectiveLog()), self.outcome(text, DirectiveLog()))


class PolicyMonotonicityProperties(unittest.TestCase):
    @settings(max_examples=500, deadline=None, suppress_health_check=SLOW)
    @given(form=st.one_of(machine_forms(), any_forms(4)), pair=stricter_policies(), trust=trust_levels)
    def test_stricter_policy_never_approves_more(self, form, pair, trust):
        loose, strict = pair
        loose_report = inspect_form(form, loose, trust)
        strict_report = inspect_form(form, strict, trust)
        self.assertLessEqual(set(loose_report.failed_checks), set(strict_report.failed_checks))
        if strict_report.approved:
            self.assertTrue(loose_report.approved)

    @settings(max_examples=300, deadline=None, suppress_health_check=SLOW)
    @given(form=st.one_of(machine_forms(), any_forms(4)), pi=policies, trust=trust_levels)
    def test_inspection_is_deterministic(self, form, pi, trust):
        self.assertEqual(inspect_form(form, pi, trust).to_dict(), inspect_form(form, pi, trust).to_dict())


def _enumerate_caps(form):
    """Ask atoms found by visiting every node; None when an ask has no usable target."""
    atoms = set()
    for _, node in form.walk():
        if node.kind is not Kind.ASK:
            continue
        if node.variant is None:
            return None
        key, target = node.variant
        if key not in ("using", "from") or not isinstance(target, str) or not target:
            return None
        atoms.add(CapabilityAtom.model(target) if key == "using" else CapabilityAtom.call(target))
    return frozenset(atoms)


class CapabilityProperties(unittest.TestCase):
    @settings(max_examples=500, deadline=None, suppress_health_check=SLOW)
    @given(form=st.one_of(machine_forms(), any_forms(4)))
    def test_capabilities_match_enumeration(self, form):
        expected = _enumerate_caps(form)
        if expected is None:
            with self.assertRaises(FormError) as ctx:
                form.capabilities()
            self.assertEqual(ctx.exception.code, "malformed-ask")
        else:
            self.assertEqual(form.capabilities(), expected)


def _state_machine(fields):
    return Form(Kind.MACHINE, "m", children=(Form(Kind.STATE, fields=fields),))


class HashProperties(unittest.TestCase):
    @settings(max_examples=300, deadline=None, suppress_health_check=SLOW)
    @given(fields=st.dictionaries(identifiers, values, min_size=1, max_size=5), data=st.data())
    def test_hash_ignores_the_order_fields_are_filled_in(self, fields, data):
        direct = _state_machine(tuple(fields.items()))
        filled = _state_machine(tuple((key, None) for key in fields))
        for key in data.draw(st.permutations(list(fields))):
            filled = set_value(filled, f"state.{key}", fields[key])
        self.assertEqual(form_hash(filled), form_hash(direct))

    @settings(max_examples=300, deadline=None, suppress_health_check=SLOW)
    @given(entries=st.dictionaries(identifiers, scalars, min_size=1, max_size=5), data=st.data())
    def test_hash_ignores_the_order_association_entries_are_filled_in(self, entries, data):
        direct = _state_machine((("cfg", dict(entries)),))
        filled = _state_machine((("cfg", {key: None for key in entries}),))
        for key in data.draw(st.permutations(list(entries))):
            filled = set_value(filled, f"state.cfg.{key}", entries[key])
        self.assertEqual(form_hash(filled), form_hash(direct))


class MaterializeProperties(unittest.TestCase):
    @settings(max_examples=1_000, deadline=None, suppress_health_check=SLOW)
    @given(form=st.one_of(machine_forms(), any_forms(4)), pi=policies, trust=trust_levels, mode=modes)
    def test_exactly_one_decision_per_call(self, form, pi, trust, mode):
        registry = Registry()
        materialize(registry, load_fixture("greeter.mt"), permissive_policy(), "human", "eval")
        machines = registry.machine_count
        decisions = len(registry.decisions)

        result = materialize(registry, form, pi, trust, mode, evidence={"n": 1})

        self.assertEqual(len(registry.decisions), decisions + 1)
        self.assertEqual(len(registry.directives), decisions + 1)
        self.assertIs(registry.decisions[-1], result.record)
        self.assertEqual(result.record.form_hash, form_hash(form))
        if not result.approved or mode == "describe":
            self.assertLessEqual(registry.machine_count, machines)
            self.assertEqual(len(registry.ledger), 0)
        if result.approved and mode == "propose":
            self.assertIsInstance(result.outcome, LedgerRef)
            self.assertEqual(len(registry.ledger), 1)


class RoundTripProperties(unittest.TestCase):
    @settings(max_examples=300, deadline=None, suppress_health_check=SLOW)
    @given(form=machine_forms())
    def test_text_round_trip(self, form):
        text = to_text(form)
        self.assertEqual(parse_source(text), form)
        self.assertEqual(to_text(parse_source(text)), text)

    @settings(max_examples=300, deadline=None, suppress_health_check=SLOW)
    @given(form=st.one_of(machine_forms(), named_forms()))
    def test_json_round_trip(self, form):
        self.assertEqual(from_json(to_json(form)), form)

    @settings(max_examples=300, deadline=None, suppress_health_check=SLOW)
    @given(a=machine_forms(), b=machine_forms())
    def test_diff_reconstructs(self, a, b):
        self.assertEqual(apply_diff(a, diff(a, b)), b)


class InspectionProperties(unittest.TestCase):
    @settings(max_examples=500, deadline=None, suppress_health_check=SLOW)
    @given(form=any_forms(), pi=policies, trust=trust_levels)
    def test_inspection_is_total(self, form, pi, trust):
        report = inspect_form(form, pi, trust)
        self.assertEqual([check.name for check in report.checks], list(CHECK_NAMES))
        self.assertEqual(report.form_hash, form_hash(form))
        self.assertTrue(render_text(form))


class TraceProperties(unittest.TestCase):
    @settings(max_examples=300, deadline=None, suppress_health_check=SLOW)
    @given(form=machine_forms())
    def test_trace_stays_within_authorized_caps(self, form):
        registry = Registry()
        pi = permissive_policy(allowed_models=frozenset(MODELS))
        outcome = materialize(registry, form, pi, "untrusted", "eval")
        if not outcome.approved:
            return
        machine = outcome.outcome
        try:
            result = run(RunRequest(machine, {}, MockProvider(), pi, "untrusted", registry))
        except RunError:
            return
        self.assertLessEqual(len(result.trace), machine.form.count_steps())
        for directive in result.trace:
            self.assertIn(directive.kind, RUNTIME_KINDS)
            self.assertIn(directive.capability, machine.authorized_caps)
            self.assertEqual(directive.decision, machine.decision_id)


class SequentialCompositionProperties(unittest.TestCase):
    step = st.one_of(
        st.tuples(st.just("materialize"), st.one_of(machine_forms(), any_forms(3)), policies, trust_levels, modes),
        st.tuples(st.just("pure"), machine_forms(), st.sampled_from(PURE_OPS)),
    )

    @settings(max_examples=200, deadline=None, suppress_health_check=SLOW)
    @given(steps=st.lists(step, min_size=1, max_size=8))
    def test_audit_and_chain_hold_after_every_step(self, steps):
        registry = Registry()
        for step in steps:
            if step[0] == "materialize":
                _, form, pi, trust, mode = step
                materialize(registry, form, pi, trust, mode, evidence={"step": len(registry.decisions)})
            else:
                _, form, op = step
                try:
                    op(form, DirectiveLog())
                except KernelError:
                    pass
            self.assertEqual(audit_no_bypass(registry), [])
            self.assertIsNone(verify_ledger(registry))


class ConservativityTests(unittest.TestCase):
    def test_directive_kinds_are_closed(self):
        self.assertEqual({kind.value for kind in DirectiveKind}, {"materialize", "model-invoke", "machine-call"})

        registry = Registry()
        pi = permissive_policy()
        admitted = materialize(registry, load_fixture("self_improving.mt"), pi, "untrusted", "eval").outcome
        result = run(RunRequest(admitted, {}, MockProvider.load(fixture_path("models.json")), pi, "untrusted", registry))
        self.assertTrue(result.ok, result.error)

        kinds = result.trace.kinds() | registry.directives.kinds()
        self.assertEqual(kinds, set(DirectiveKind))
        self.assertEqual(observed_kinds(), frozenset(DirectiveKind))


if __name__ == "__main__":
    unittest.main()
