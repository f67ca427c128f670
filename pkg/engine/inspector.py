"""Structural inspection: six named checks over a form and a policy.

Inspection is total and pure. It never raises on a malformed form (that is
what check 1 reports), never touches a registry and never emits a
directive. The report binds to the exact form inspected through its hash.
"""
import sys
from pathlib import Path
from typing import Iterable, Optional, Union

# Handle imports for both module and direct execution
try:
    from ..models.capability import permitted
    from ..models.decision import CheckResult, InspectionReport
    from ..models.form import Form, ask_capability
    from ..models.kind import ASK_USING, Kind
    from ..models.policy import PolicyContext, TrustLevel
    from ..writers.form_text import form_hash
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.capability import permitted
    from models.decision import CheckResult, InspectionReport
    from models.form import Form, ask_capability
    from models.kind import ASK_USING, Kind
    from models.policy import PolicyContext, TrustLevel
    from writers.form_text import form_hash


def compute_capset(form: Form) -> frozenset:
    """CapSet of ``form``. Raises ``malformed-ask`` like ``Form.capabilities``."""
    return form.capabilities()


def estimate_cost(form: Form, pi: PolicyContext) -> int:
    """Compute and call steps cost ``compute_step_cost``; model asks cost
    the model's listed price, or the default."""
    total = 0
    for step in form.steps():
        if step.kind is Kind.ASK and step.variant_key == ASK_USING and ask_capability(step) is not None:
            total += pi.model_cost(step.variant_value)
        else:
            total += pi.compute_step_cost
    return total


def inspect_form(
    form: Form,
    pi: PolicyContext,
    trust: Union[TrustLevel, str],
    caller_caps: Optional[Iterable[str]] = None,
) -> InspectionReport:
    """Run all six checks in order and report every failure.

    ``caller_caps``, when given, is the capability set of whoever asked for
    the materialization; the form may not need more than its caller holds.
    """
    trust = TrustLevel.parse(trust)
    atoms, malformed = _scan_asks(form)
    cost = estimate_cost(form, pi)

    checks = (
        _valid_structure(form),
        _required_fields(form, pi),
        _permitted_capabilities(atoms, malformed, pi, caller_caps),
        _model_authorization(form, pi),
        _governance_presence(form, pi, cost),
        _trust_level(trust, pi),
    )
    return InspectionReport(
        form_hash=form_hash(form),
        checks=checks,
        required_caps=frozenset(atoms),
        estimated_cost=cost,
    )


# ----------------------------------------------------------------------
# The checks
# ----------------------------------------------------------------------


def _valid_structure(form: Form) -> CheckResult:
    violations = form.validate()
    if not violations:
        return CheckResult("valid-structure", True)
    shown = "; ".join(str(v) for v in violations[:3])
    more = f" (+{len(violations) - 3} more)" if len(violations) > 3 else ""
    return CheckResult("valid-structure", False, shown + more)


def _required_fields(form: Form, pi: PolicyContext) -> CheckResult:
    missing = []
    for kind_word, key in pi.required_fields:
        kind = Kind.parse(kind_word)
        for path, node in form.walk():
            if node.kind is kind and not node.has_field(key):
                missing.append(f"{path or '(root)'} lacks {key}")
    if missing:
        return CheckResult("required-fields", False, "; ".join(missing))
    return CheckResult("required-fields", True)


def _permitted_capabilities(atoms, malformed, pi, caller_caps) -> CheckResult:
    problems = [f"malformed ask at {path}" for path in malformed]
    problems += [f"{atom} not in allowed_caps" for atom in sorted(atoms) if not permitted(atom, pi.allowed_caps)]
    if caller_caps is not None:
        held = tuple(caller_caps)
        problems += [f"{atom} exceeds caller capabilities" for atom in sorted(atoms) if not permitted(atom, held)]
    if problems:
        return CheckResult("permitted-capabilities", False, "capability containment: " + "; ".join(problems))
    return CheckResult("permitted-capabilities", True, "capability containment")


def _model_authorization(form: Form, pi: PolicyContext) -> CheckResult:
    models = sorted({
        node.variant_value
        for _, node in form.walk()
        if node.kind is Kind.ASK and node.variant_key == ASK_USING and isinstance(node.variant_value, str)
    })
    unauthorized = [model for model in models if model not in pi.allowed_models]
    if unauthorized:
        return CheckResult("model-authorization", False, "unauthorized models: " + ", ".join(unauthorized))
    return CheckResult("model-authorization", True, "model authorization")


def _governance_presence(form: Form, pi: PolicyContext, cost: int) -> CheckResult:
    problems = []
    if pi.require_governance_section and form.section(Kind.GOVERNANCE) is None:
        problems.append("no governance section")
    steps = form.count_steps()
    if pi.max_steps is not None and steps > pi.max_steps:
        problems.append(f"{steps} steps exceed max_steps {pi.max_steps}")
    if cost > pi.budget:
        problems.append(f"estimated cost {cost} exceeds budget {pi.budget}")
    bounds = f"resource bounds: cost {cost} of budget {pi.budget}"
    if problems:
        return CheckResult("governance-presence", False, "policy compliance: " + "; ".join(problems) + f"; {bounds}")
    return CheckResult("governance-presence", True, f"policy compliance; {bounds}")


def _trust_level(trust: TrustLevel, pi: PolicyContext) -> CheckResult:
    if trust.at_least(pi.min_trust):
        return CheckResult("trust-level", True, f"{trust} meets {pi.min_trust}")
    return CheckResult("trust-level", False, f"{trust} is below {pi.min_trust}")


def _scan_asks(form: Form) -> tuple[set, list[str]]:
    atoms = set()
    malformed = []
    for path, node in form.walk():
        if node.kind is Kind.ASK:
            atom = ask_capability(node)
            if atom is None:
                malformed.append(path or "(root)")
            else:
                atoms.add(atom)
    return atoms, malformed
