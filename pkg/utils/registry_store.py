"""JSON-lines persistence for the registry.

Layout, next to the decisions file::

    decisions.jsonl      one DecisionRecord per line
    machines.jsonl       one row per registered machine: hash, decision, form file
    forms/               canonical text (or JSON) of every registered form
    decisions.jsonl.lock advisory lock held while a command writes

The ledger lives wherever its path points, with ``<ledger>.head`` holding
the digest of its last line.
"""
import fcntl
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Union

import structlog

# Handle imports for both module and direct execution
try:
    from ..engine.ledger import verify_lines
    from ..models.decision import DecisionRecord
    from ..models.errors import FormError, KernelError, StoreError
    from ..models.machine import Machine
    from ..models.naming import form_filename
    from ..parsers.surface_parser import parse_source
    from ..writers.form_json import from_json, to_json
    from ..writers.form_text import form_hash, to_text
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from engine.ledger import verify_lines
    from models.decision import DecisionRecord
    from models.errors import FormError, KernelError, StoreError
    from models.machine import Machine
    from models.naming import form_filename
    from parsers.surface_parser import parse_source
    from writers.form_json import from_json, to_json
    from writers.form_text import form_hash, to_text

logger = structlog.get_logger(__name__)

MACHINES_FILE = "machines.jsonl"
FORMS_DIR = "forms"
HEAD_SUFFIX = ".head"
LOCK_SUFFIX = ".lock"


class RegistryStore:
    def __init__(self, decisions_path: Union[str, Path], ledger_path: Union[str, Path]):
        self.decisions_path = Path(decisions_path)
        self.ledger_path = Path(ledger_path)
        self.head_path = self.ledger_path.with_name(self.ledger_path.name + HEAD_SUFFIX)
        self.machines_path = self.decisions_path.with_name(MACHINES_FILE)
        self.forms_dir = self.decisions_path.with_name(FORMS_DIR)
        self.lock_path = self.decisions_path.with_name(self.decisions_path.name + LOCK_SUFFIX)
        self._lock_handle = None

    # ------------------------------------------------------------------
    # Locking
    # ------------------------------------------------------------------

    @contextmanager
    def locked(self) -> Iterator[None]:
        """Hold the exclusive writer lock; fail fast if another process has it.

        Re-entering while this store already holds the lock is a no-op.
        """
        if self._lock_handle is not None:
            yield
            return
        self.lock_path.parent.mkdir(parents=True, exist_ok=True)
        handle = open(self.lock_path, "a")
        try:
            fcntl.flock(handle.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except BlockingIOError:
            handle.close()
            raise StoreError(f"{self.lock_path} is held by another writer", code="registry-locked") from None
        self._lock_handle = handle
        try:
            yield
        finally:
            fcntl.flock(handle.fileno(), fcntl.LOCK_UN)
            handle.close()
            self._lock_handle = None

    # ------------------------------------------------------------------
    # Appends
    # ------------------------------------------------------------------

    def append_decision(self, record: DecisionRecord) -> None:
        with self.locked():
            _append_line(self.decisions_path, json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False))

    def append_ledger(self, line: str, head: str) -> None:
        with self.locked():
            _append_line(self.ledger_path, line)
            self.head_path.write_text(head + "\n", encoding="utf-8")

    def add_machine(self, machine: Machine) -> None:
        with self.locked():
            self.forms_dir.mkdir(parents=True, exist_ok=True)
            try:
                text, extension = to_text(machine.form), ".mt"
            except FormError:
                text, extension = to_json(machine.form) + "\n", ".json"
            filename = form_filename(machine.name, machine.form_hash, extension)
            (self.forms_dir / filename).write_text(text, encoding="utf-8")
            row = {
                "form_hash": machine.form_hash,
                "decision_id": machine.decision_id,
                "name": machine.name,
                "path": filename,
            }
            _append_line(self.machines_path, json.dumps(row, sort_keys=True, ensure_ascii=False))

    # ------------------------------------------------------------------
    # Reads
    # ------------------------------------------------------------------

    def load_decisions(self) -> list[DecisionRecord]:
        records = []
        for number, text in enumerate(_read_lines(self.decisions_path), start=1):
            try:
                records.append(DecisionRecord.from_dict(json.loads(text)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise StoreError(
                    f"{self.decisions_path}:{number}: unreadable decision record: {e}",
                    code="unreadable-decisions",
                ) from e
        return records

    def ledger_lines(self) -> list[bytes]:
        """Raw ledger lines, byte for byte, without their newlines."""
        try:
            data = self.ledger_path.read_bytes()
        except FileNotFoundError:
            return []
        except OSError as e:
            raise StoreError(f"cannot read ledger {self.ledger_path}: {e.strerror or e}", code="unreadable-ledger") from e
        lines = data.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        return lines

    def read_head(self) -> Optional[str]:
        try:
            return self.head_path.read_text(encoding="utf-8").strip()
        except FileNotFoundError:
            return None

    def verify_ledger(self) -> Optional[int]:
        return verify_lines(self.ledger_lines(), self.read_head())

    def machine_rows(self) -> list[dict]:
        rows = []
        for number, text in enumerate(_read_lines(self.machines_path), start=1):
            try:
                row = json.loads(text)
                rows.append({
                    "form_hash": str(row["form_hash"]),
                    "decision_id": int(row["decision_id"]),
                    "path": str(row["path"]),
                })
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise StoreError(
                    f"{self.machines_path}:{number}: unreadable machine row: {e}", code="unreadable-machines"
                ) from e
        return rows

    def load_form(self, row: dict):
        path = self.forms_dir / row["path"]
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise StoreError(f"cannot read stored form {path}: {e.strerror or e}", code="missing-form") from e
        return from_json(text) if path.suffix == ".json" else parse_source(text)

    def load_machines(self) -> list[Machine]:
        """Machines as stored. A form that no longer loads is skipped and
        left for :meth:`audit_forms` to report."""
        machines = []
        for row in self.machine_rows():
            try:
                form = self.load_form(row)
                caps = form.capabilities()
            except KernelError as e:
                logger.warning("stored_form_unreadable", form_hash=row["form_hash"][:12], code=e.code)
                continue
            machines.append(Machine(
                form_hash=row["form_hash"],
                form=form,
                authorized_caps=caps,
                reflect_constant=form,
                decision_id=row["decision_id"],
            ))
        return machines

    def audit_forms(self) -> list[str]:
        """Hashes whose stored form is missing, unreadable or re-hashes to
        something other than its key."""
        bad = []
        for row in self.machine_rows():
            try:
                intact = form_hash(self.load_form(row)) == row["form_hash"]
            except KernelError:
                intact = False
            if not intact:
                bad.append(row["form_hash"])
        return bad


def _append_line(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8", newline="\n") as handle:
        handle.write(text + "\n")


def _read_lines(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return []
    except (OSError, UnicodeDecodeError) as e:
        raise StoreError(f"cannot read {path}: {e}", code="unreadable-store") from e
    return [line for line in text.split("\n") if line.strip()]
