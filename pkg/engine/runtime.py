"""Runs authorized machines step by step.

Compute steps are pure: their fields are evaluated against the run's trace
and may not grow it. Ask steps are the only source of effects. Each one
appends a single directive to the trace, checked against the machine's
authorized capabilities, before it calls out. ``ask ... from:`` may target
only the two system machines, which reach back into governance.
"""
import re
import sys
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import structlog

# Handle imports for both module and direct execution
try:
    from ..models.directive import Directive, DirectiveKind, DirectiveLog
    from ..models.errors import KernelError, ProviderError, RunError, SystemMachineError
    from ..models.form import Form, ask_capability
    from ..models.kind import ASK_USING, Kind
    from ..models.machine import Machine
    from ..models.policy import PolicyContext, TrustLevel
    from ..models.values import Expression
    from ..writers.form_json import encode_value
    from .evaluator import Env, eval_value
    from .governance import LedgerRef, Materialization, Registry, decision_backed, materialize
    from .providers import ModelProvider
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.directive import Directive, DirectiveKind, DirectiveLog
    from models.errors import KernelError, ProviderError, RunError, SystemMachineError
    from models.form import Form, ask_capability
    from models.kind import ASK_USING, Kind
    from models.machine import Machine
    from models.policy import PolicyContext, TrustLevel
    from models.values import Expression
    from writers.form_json import encode_value
    from engine.evaluator import Env, eval_value
    from engine.governance import LedgerRef, Materialization, Registry, decision_backed, materialize
    from engine.providers import ModelProvider

logger = structlog.get_logger(__name__)

OK = "ok"
FAILED = "failed"

EVAL_MACHINE = "@system/runtime/eval"
PROPOSE_MACHINE = "@system/evolution/propose"

# Nested @system/runtime/eval runs deeper than this fail the calling step.
MAX_CALL_DEPTH = 8

_WORD_RE = re.compile(r"[A-Za-z_]+")


@dataclass
class RunRequest:
    machine: Machine
    inputs: Mapping
    provider: ModelProvider
    pi: PolicyContext
    trust: Union[TrustLevel, str]
    registry: Registry
    depth: int = 0


@dataclass
class RunResult:
    step_values: dict = field(default_factory=dict)
    trace: DirectiveLog = field(default_factory=DirectiveLog)
    status: str = OK
    failed_step: Optional[str] = None
    error: Optional[KernelError] = None

    @property
    def ok(self) -> bool:
        return self.status == OK

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "failed_step": self.failed_step,
            "error": None if self.error is None else {"code": self.error.code, "message": self.error.message},
            "step_values": {name: encode_value(value) for name, value in self.step_values.items()},
            "trace": [directive.to_dict() for directive in self.trace],
        }


def reflect_of(machine: Machine) -> Form:
    """The form bound at materialization; never recomputed."""
    return machine.reflect_constant


def run(req: RunRequest) -> RunResult:
    """Execute ``req.machine``.

    Raises ``RunError`` before any step runs when the machine is not backed
    by an approved decision in ``req.registry`` or a required input is
    missing. Once running, a failing step ends the run with status failed.
    """
    machine = req.machine
    if req.registry.machine(machine.form_hash) is None or not decision_backed(req.registry, machine):
        raise RunError(
            f"machine {machine.form_hash[:12]} is not backed by an approved decision",
            code="unauthorized-machine",
        )
    _check_inputs(machine.form, req.inputs)

    result = RunResult()
    env = Env({"input": dict(req.inputs)}, reflect=reflect_of(machine))
    logger.info("run_started", machine=machine.name, steps=machine.form.count_steps(), depth=req.depth)

    for step in machine.form.steps():
        try:
            if step.kind is Kind.COMPUTE:
                value = _compute(step, env, result.trace)
            elif step.variant_key == ASK_USING:
                value = _ask_model(req, step, env, result.trace)
            else:
                value = _ask_machine(req, step, env, result.trace)
        except KernelError as e:
            logger.warning("run_step_failed", machine=machine.name, step=step.name, code=e.code)
            result.status = FAILED
            result.failed_step = step.name
            result.error = e
            return result
        result.step_values[step.name] = value
        env.bind(step.name, value)

    logger.info("run_finished", machine=machine.name, directives=len(result.trace))
    return result


# ----------------------------------------------------------------------
# Steps
# ----------------------------------------------------------------------


def _compute(step: Form, env: Env, trace: DirectiveLog) -> dict:
    values = {}
    for key, raw in step.fields:
        value = eval_value(raw, env, trace)
        env.bind(key, value)
        values[key] = value
    return values


def _ask_model(req: RunRequest, step: Form, env: Env, trace: DirectiveLog) -> dict:
    atom = _authorize(req.machine, step)
    task = step.section(Kind.TASK)
    returns = step.section(Kind.RETURNS)
    schema = [(key, _type_word(value)) for key, value in returns.fields] if returns is not None else []

    trace.append(Directive(
        DirectiveKind.MODEL_INVOKE,
        {"machine": req.machine.name, "step": step.name, "model": step.variant_value},
        decision=req.machine.decision_id,
        capability=atom,
    ))
    try:
        response = req.provider.invoke(
            step.variant_value,
            (task.content or "") if task is not None else "",
            schema,
            machine=req.machine.name,
            step=step.name,
        )
    except KernelError:
        raise
    except Exception as e:
        raise ProviderError(f"provider failed on {step.name}: {e}") from e
    return dict(response)


def _ask_machine(req: RunRequest, step: Form, env: Env, trace: DirectiveLog) -> dict:
    atom = _authorize(req.machine, step)
    target = step.variant_value

    trace.append(Directive(
        DirectiveKind.MACHINE_CALL,
        {"machine": req.machine.name, "step": step.name, "target": target},
        decision=req.machine.decision_id,
        capability=atom,
    ))
    definition = eval_value(step.field("definition"), env, trace) if step.has_field("definition") else None
    evidence = eval_value(step.field("evidence"), env, trace) if step.has_field("evidence") else None

    if target == PROPOSE_MACHINE:
        outcome = system_propose(req.registry, definition, evidence, req.machine.form_hash, req.pi, req.trust)
        ref = outcome.outcome if isinstance(outcome.outcome, LedgerRef) else None
        return {
            "approved": outcome.approved,
            "decision_id": outcome.record.id,
            "seq": None if ref is None else ref.seq,
            "rejected_checks": list(outcome.record.report.failed_checks),
        }
    if target == EVAL_MACHINE:
        if req.depth >= MAX_CALL_DEPTH:
            raise SystemMachineError(f"eval nested deeper than {MAX_CALL_DEPTH}", code="call-depth-exceeded")
        outcome, nested = system_eval(req.registry, definition, req.pi, req.trust, req.provider, req.depth + 1)
        return {
            "approved": outcome.approved,
            "decision_id": outcome.record.id,
            "status": "rejected" if nested is None else nested.status,
            "steps": {} if nested is None else nested.step_values,
        }
    raise SystemMachineError(f"no system machine at {target}", code="unknown-system-machine")


# ----------------------------------------------------------------------
# System machines
# ----------------------------------------------------------------------


def system_eval(
    registry: Registry,
    definition: Any,
    pi: PolicyContext,
    trust: Union[TrustLevel, str],
    provider: ModelProvider,
    depth: int = 0,
) -> tuple[Materialization, Optional[RunResult]]:
    """Materialize ``definition`` in eval mode and, if approved, run it with
    no inputs. The run result is None when governance rejected it."""
    form = _require_definition(definition)
    outcome = materialize(registry, form, pi, trust, "eval")
    if not outcome.approved:
        return outcome, None
    nested = run(RunRequest(outcome.outcome, {}, provider, pi, trust, registry, depth))
    return outcome, nested


def system_propose(
    registry: Registry,
    definition: Any,
    evidence: Any,
    old: Optional[str],
    pi: PolicyContext,
    trust: Union[TrustLevel, str],
) -> Materialization:
    """Submit ``definition`` as a new version through propose mode."""
    form = _require_definition(definition)
    return materialize(registry, form, pi, trust, "propose", evidence=evidence, old=old)


def _require_definition(definition: Any) -> Form:
    if definition is None:
        raise SystemMachineError("no definition was submitted", code="missing-definition")
    if not isinstance(definition, Form):
        raise SystemMachineError(
            f"definition must be a form, got {type(definition).__name__}", code="invalid-definition"
        )
    return definition


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------


def _authorize(machine: Machine, step: Form):
    atom = ask_capability(step)
    if atom is None or atom not in machine.authorized_caps:
        raise RunError(f"{step.name} needs {atom}, which was never authorized", code="unauthorized-capability")
    return atom


def _type_word(value: Any) -> str:
    if isinstance(value, Expression):
        return value.source.strip()
    return str(value)


def _check_inputs(form: Form, inputs: Mapping) -> None:
    provides = form.section(Kind.PROVIDES)
    if provides is None:
        return
    for block in provides.children:
        if block.kind is not Kind.INPUTS:
            continue
        for key, declaration in block.fields:
            if "required" in _WORD_RE.findall(str(declaration)) and key not in inputs:
                raise RunError(f"required input {key!r} is missing", code="missing-input")
