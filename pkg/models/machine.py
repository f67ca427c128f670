"""Registered machines and evolution ledger entries."""
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

try:
    from .form import Form
    from .form_diff import EMPTY_DIFF, FormDiff
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.form import Form
    from models.form_diff import EMPTY_DIFF, FormDiff


ZERO_DIGEST = "0" * 64


@dataclass(frozen=True)
class Machine:
    """An authorized executable. Only governance constructs these."""

    form_hash: str
    form: Form
    authorized_caps: frozenset
    reflect_constant: Form
    decision_id: int

    @property
    def name(self) -> Optional[str]:
        return self.form.name


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    old_hash: Optional[str]
    new_hash: str
    diff: FormDiff = EMPTY_DIFF
    evidence: Any = None
    decision_id: int = 0
    prev_entry_hash: str = ZERO_DIGEST
