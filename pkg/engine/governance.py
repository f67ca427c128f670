"""Governed materialization: the only path from a form to a Machine.

Every call to :func:`materialize` inspects the form, appends exactly one
:class:`DecisionRecord` and one ``materialize`` directive, and only then, if
approved, changes the registry: a Machine for ``eval``, a ledger entry plus
a registered version for ``propose``, nothing for ``describe``.
"""
import sys
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Union

import structlog

# Handle imports for both module and direct execution
try:
    from ..models.decision import DecisionRecord, InspectionReport, MaterializeMode
    from ..models.directive import Directive, DirectiveKind, DirectiveLog
    from ..models.errors import GovernanceError
    from ..models.form import Form
    from ..models.form_diff import EMPTY_DIFF, diff as form_diff
    from ..models.machine import LedgerEntry, Machine
    from ..models.policy import PolicyContext, TrustLevel
    from ..writers.form_text import form_hash
    from ..writers.report_writer import ReportWriter
    from .inspector import inspect_form
    from .ledger import EvolutionLedger
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.decision import DecisionRecord, InspectionReport, MaterializeMode
    from models.directive import Directive, DirectiveKind, DirectiveLog
    from models.errors import GovernanceError
    from models.form import Form
    from models.form_diff import EMPTY_DIFF, diff as form_diff
    from models.machine import LedgerEntry, Machine
    from models.policy import PolicyContext, TrustLevel
    from writers.form_text import form_hash
    from writers.report_writer import ReportWriter
    from engine.inspector import inspect_form
    from engine.ledger import EvolutionLedger

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class Rejection:
    failed_checks: tuple
    report: InspectionReport

    def __str__(self) -> str:
        return "rejected: " + ", ".join(self.failed_checks)


@dataclass(frozen=True)
class LedgerRef:
    seq: int
    entry: LedgerEntry


@dataclass(frozen=True)
class Materialization:
    """What a materialize call produced, and the record it emitted."""

    outcome: Union[Machine, LedgerRef, str, Rejection]
    record: DecisionRecord

    @property
    def approved(self) -> bool:
        return self.record.approved


class Registry:
    """Machines, decisions, the evolution ledger and the governance log.

    All writes go through :func:`materialize` under one lock. With a
    ``store`` attached every write is also appended to disk as it happens.
    """

    def __init__(self, store=None):
        self.machines: dict[str, Machine] = {}
        self.decisions: list[DecisionRecord] = []
        self.ledger = EvolutionLedger()
        self.directives = DirectiveLog()
        self.store = store
        self._lock = threading.RLock()

    @classmethod
    def load(cls, store, with_ledger: bool = True) -> "Registry":
        """Rebuild a registry from its persisted files.

        ``with_ledger=False`` leaves the ledger empty, for audits that must
        still run when the ledger file is damaged.
        """
        registry = cls(store)
        registry.decisions = list(store.load_decisions())
        if with_ledger:
            registry.ledger = EvolutionLedger.from_lines(store.ledger_lines())
        for machine in store.load_machines():
            registry.machines[machine.form_hash] = machine
        return registry

    def machine(self, digest: str) -> Optional[Machine]:
        return self.machines.get(digest)

    def decision(self, decision_id: int) -> Optional[DecisionRecord]:
        if 1 <= decision_id <= len(self.decisions):
            record = self.decisions[decision_id - 1]
            if record.id == decision_id:
                return record
        return next((record for record in self.decisions if record.id == decision_id), None)

    @property
    def machine_count(self) -> int:
        return len(self.machines)

    def _next_id(self) -> int:
        return (self.decisions[-1].id + 1) if self.decisions else 1


def materialize(
    registry: Registry,
    form: Form,
    pi: PolicyContext,
    trust: Union[TrustLevel, str],
    mode: Union[MaterializeMode, str],
    evidence: Any = None,
    old: Optional[str] = None,
    caller_caps: Optional[Iterable[str]] = None,
) -> Materialization:
    """Inspect ``form`` and act on the verdict.

    Raises ``missing-evidence`` for a propose without evidence and
    ``unknown-old-hash`` when ``old`` names no registered machine; both are
    checked before anything is recorded.
    """
    mode = MaterializeMode.parse(mode)
    trust = TrustLevel.parse(trust)

    with registry._lock:
        if mode is MaterializeMode.PROPOSE and evidence is None:
            raise GovernanceError("propose needs evidence", code="missing-evidence")
        if old is not None and old not in registry.machines:
            raise GovernanceError(f"no registered machine has hash {old}", code="unknown-old-hash")

        report = inspect_form(form, pi, trust, caller_caps)
        digest = report.form_hash
        decision_id = registry._next_id()

        if not report.approved:
            reasons = tuple(f"{check.name}: {check.detail}" for check in report.checks if not check.passed)
            record = DecisionRecord(decision_id, mode, digest, report, trust.value, reasons)
            _record(registry, record)
            return Materialization(Rejection(tuple(report.failed_checks), report), record)

        if mode is MaterializeMode.DESCRIBE:
            record = DecisionRecord(decision_id, mode, digest, report, trust.value)
            _record(registry, record)
            return Materialization(ReportWriter.describe(form, report), record)

        if mode is MaterializeMode.EVAL:
            record = DecisionRecord(decision_id, mode, digest, report, trust.value)
            return Materialization(_commit(registry, record, form, report), record)

        record = DecisionRecord(decision_id, mode, digest, report, trust.value, ledger_seq=len(registry.ledger))
        change = form_diff(registry.machines[old].form, form) if old is not None else EMPTY_DIFF
        entry, line = registry.ledger.append(old, digest, change, evidence, decision_id)
        try:
            if registry.store is not None:
                registry.store.append_ledger(line, registry.ledger.head)
            _commit(registry, record, form, report)
        except Exception:
            registry.ledger.truncate(entry.seq)
            raise
        return Materialization(LedgerRef(entry.seq, entry), record)


def _commit(registry: Registry, record: DecisionRecord, form: Form, report: InspectionReport) -> Machine:
    """Register the machine, then record the approving decision.

    The decision is written last so a failed write never leaves an approved
    decision without its machine; a machine added by this call is removed
    again when the decision cannot be written.
    """
    before = registry.machines.get(report.form_hash)
    machine = _register(registry, form, report, record.id)
    try:
        _record(registry, record)
    except Exception:
        if before is None:
            registry.machines.pop(machine.form_hash, None)
        raise
    return machine


def _record(registry: Registry, record: DecisionRecord) -> None:
    if registry.store is not None:
        registry.store.append_decision(record)
    registry.decisions.append(record)
    registry.directives.append(Directive(
        DirectiveKind.MATERIALIZE,
        {"mode": record.mode.value, "form_hash": record.form_hash, "verdict": record.verdict},
        decision=record.id,
    ))
    logger.info(
        "materialize_decided",
        decision_id=record.id,
        mode=record.mode.value,
        verdict=record.verdict,
        form_hash=record.form_hash[:12],
        failed_checks=record.report.failed_checks,
    )


def _register(registry: Registry, form: Form, report: InspectionReport, decision_id: int) -> Machine:
    """Insert a Machine for ``form`` unless its hash is already registered."""
    existing = registry.machines.get(report.form_hash)
    if existing is not None:
        return existing
    machine = Machine(
        form_hash=report.form_hash,
        form=form,
        authorized_caps=frozenset(report.required_caps),
        reflect_constant=form,
        decision_id=decision_id,
    )
    if registry.store is not None:
        registry.store.add_machine(machine)
    registry.machines[machine.form_hash] = machine
    logger.info("machine_registered", form_hash=machine.form_hash[:12], decision_id=decision_id)
    return machine


def verify_ledger(registry: Registry) -> Optional[int]:
    """None when every link of the ledger verifies, else the first broken seq.

    With a store attached the persisted lines and head are checked too.
    """
    with registry._lock:
        broken = registry.ledger.verify()
        if broken is None and registry.store is not None:
            broken = registry.store.verify_ledger()
    if broken is not None:
        logger.warning("ledger_chain_broken", seq=broken)
    return broken


def decision_backed(registry: Registry, machine: Machine) -> bool:
    """The audit predicate for one machine.

    Its decision exists, was an approved eval or propose, names the same
    hash, and the form still hashes to that key.
    """
    record = registry.decision(machine.decision_id)
    return (
        record is not None
        and record.approved
        and record.mode in (MaterializeMode.EVAL, MaterializeMode.PROPOSE)
        and record.form_hash == machine.form_hash
        and form_hash(machine.form) == machine.form_hash
    )


def audit_no_bypass(registry: Registry) -> list[str]:
    """Hashes of registered machines no decision accounts for; empty is ok."""
    with registry._lock:
        orphans = [
            key for key, machine in registry.machines.items()
            if key != machine.form_hash or not decision_backed(registry, machine)
        ]
    if orphans:
        logger.warning("audit_orphans_found", count=len(orphans))
    return orphans
