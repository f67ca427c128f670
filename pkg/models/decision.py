"""Inspection reports and decision records."""
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

try:
    from .capability import CapabilityAtom, render_caps
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.capability import CapabilityAtom, render_caps


APPROVED = "approved"
REJECTED = "rejected"

CHECK_NAMES = (
    "valid-structure",
    "required-fields",
    "permitted-capabilities",
    "model-authorization",
    "governance-presence",
    "trust-level",
)


class MaterializeMode(Enum):
    EVAL = "eval"
    PROPOSE = "propose"
    DESCRIBE = "describe"

    @classmethod
    def parse(cls, text) -> "MaterializeMode":
        return text if isinstance(text, MaterializeMode) else cls(text)

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}

    @classmethod
    def from_dict(cls, data: dict) -> "CheckResult":
        return cls(data["name"], bool(data["passed"]), data.get("detail", ""))


@dataclass(frozen=True)
class InspectionReport:
    """Outcome of the six checks, bound to the inspected form by its hash."""

    form_hash: str
    checks: tuple
    required_caps: frozenset = frozenset()
    estimated_cost: int = 0

    @property
    def approved(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def verdict(self) -> str:
        return APPROVED if self.approved else REJECTED

    @property
    def failed_checks(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]

    def check(self, name: str) -> Optional[CheckResult]:
        return next((check for check in self.checks if check.name == name), None)

    def to_dict(self) -> dict:
        return {
            "form_hash": self.form_hash,
            "verdict": self.verdict,
            "checks": [check.to_dict() for check in self.checks],
            "required_caps": render_caps(self.required_caps),
            "estimated_cost": self.estimated_cost,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InspectionReport":
        return cls(
            form_hash=data["form_hash"],
            checks=tuple(CheckResult.from_dict(check) for check in data["checks"]),
            required_caps=frozenset(CapabilityAtom.parse(cap) for cap in data.get("required_caps", [])),
            estimated_cost=int(data.get("estimated_cost", 0)),
        )


@dataclass(frozen=True)
class DecisionRecord:
    """The one directive every materialization emits, approved or rejected."""

    id: int
    mode: MaterializeMode
    form_hash: str
    report: InspectionReport
    trust: str = "untrusted"
    rejection_reasons: tuple = ()
    ledger_seq: Optional[int] = None

    @property
    def verdict(self) -> str:
        return self.report.verdict

    @property
    def approved(self) -> bool:
        return self.report.approved

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "mode": self.mode.value,
            "form_hash": self.form_hash,
            "verdict": self.verdict,
            "trust": self.trust,
            "report": self.report.to_dict(),
            "rejection_reasons": list(self.rejection_reasons),
            "ledger_seq": self.ledger_seq,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionRecord":
        return cls(
            id=int(data["id"]),
            mode=MaterializeMode(data["mode"]),
            form_hash=data["form_hash"],
            report=InspectionReport.from_dict(data["report"]),
            trust=data.get("trust", "untrusted"),
            rejection_reasons=tuple(data.get("rejection_reasons", ())),
            ledger_seq=data.get("ledger_seq"),
        )
