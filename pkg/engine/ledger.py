"""The evolution ledger: an append-only, hash-chained record of proposals.

Each entry is persisted as one canonical JSON line (sorted keys, compact
separators, UTF-8). An entry's ``prev_entry_hash`` is the SHA-256 of the
previous line's bytes, so altering any persisted entry breaks the link
held by the entry after it. The digest of the last line is kept as the
ledger head, which covers the final entry.
"""
import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Union

import structlog

# Handle imports for both module and direct execution
try:
    from ..models.errors import StoreError
    from ..models.form_diff import EMPTY_DIFF, DiffEntry, FormDiff
    from ..models.machine import ZERO_DIGEST, LedgerEntry
    from ..writers.form_json import decode_value, encode_value
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.errors import StoreError
    from models.form_diff import EMPTY_DIFF, DiffEntry, FormDiff
    from models.machine import ZERO_DIGEST, LedgerEntry
    from writers.form_json import decode_value, encode_value

logger = structlog.get_logger(__name__)

ENTRY_KEYS = ("seq", "old_hash", "new_hash", "diff", "evidence", "decision_id", "prev_entry_hash")


# ----------------------------------------------------------------------
# Encoding
# ----------------------------------------------------------------------


def entry_to_dict(entry: LedgerEntry) -> dict:
    return {
        "seq": entry.seq,
        "old_hash": entry.old_hash,
        "new_hash": entry.new_hash,
        "diff": [
            {
                "path": item.path,
                "op": item.op,
                "target": item.target,
                "before": encode_value(item.before),
                "after": encode_value(item.after),
            }
            for item in entry.diff
        ],
        "evidence": encode_value(entry.evidence),
        "decision_id": entry.decision_id,
        "prev_entry_hash": entry.prev_entry_hash,
    }


def entry_from_dict(data: Any) -> LedgerEntry:
    if not isinstance(data, dict) or set(data) != set(ENTRY_KEYS):
        raise StoreError("ledger line does not hold a ledger entry", code="unreadable-ledger")
    try:
        diff = FormDiff(tuple(
            DiffEntry(
                path=item["path"],
                op=item["op"],
                before=decode_value(item.get("before")),
                after=decode_value(item.get("after")),
                target=item.get("target", "field"),
            )
            for item in data["diff"]
        ))
        return LedgerEntry(
            seq=int(data["seq"]),
            old_hash=data["old_hash"],
            new_hash=data["new_hash"],
            diff=diff if diff else EMPTY_DIFF,
            evidence=decode_value(data["evidence"]),
            decision_id=int(data["decision_id"]),
            prev_entry_hash=data["prev_entry_hash"],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise StoreError(f"malformed ledger entry: {e}", code="unreadable-ledger") from e


def canonical_line(entry: LedgerEntry) -> str:
    """The exact text persisted for ``entry``, without the newline."""
    return json.dumps(entry_to_dict(entry), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def line_digest(line: Union[str, bytes]) -> str:
    data = line.encode("utf-8") if isinstance(line, str) else line
    return hashlib.sha256(data).hexdigest()


def parse_line(line: Union[str, bytes]) -> LedgerEntry:
    try:
        text = line.decode("utf-8") if isinstance(line, bytes) else line
        return entry_from_dict(json.loads(text))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise StoreError(f"ledger line is not JSON: {e}", code="unreadable-ledger") from e


# ----------------------------------------------------------------------
# Verification
# ----------------------------------------------------------------------


def verify_lines(lines: list, head: Optional[str] = None) -> Optional[int]:
    """First seq whose link fails to verify, or None when the chain holds.

    Entry ``s`` must carry ``seq == s`` and the digest of line ``s - 1`` (the
    zero digest for ``s == 0``). A line that no longer parses cannot vouch
    for its predecessor; its own corruption shows up at the next link. When
    ``head`` is given it must equal the digest of the last line, and a
    mismatch is reported at ``len(lines)``.
    """
    expected_prev = ZERO_DIGEST
    for seq, line in enumerate(lines):
        try:
            entry = parse_line(line)
        except StoreError:
            entry = None
        if entry is not None and (entry.seq != seq or entry.prev_entry_hash != expected_prev):
            return seq
        expected_prev = line_digest(line)
    if head is not None and head != expected_prev:
        return len(lines)
    return None


class EvolutionLedger:
    """In-memory ledger keeping both parsed entries and their exact lines."""

    def __init__(self):
        self._entries: list[LedgerEntry] = []
        self._lines: list[Union[str, bytes]] = []

    @classmethod
    def from_lines(cls, lines: Iterable[Union[str, bytes]]) -> "EvolutionLedger":
        """Rebuild from persisted lines. Raises ``unreadable-ledger`` on a
        line that does not parse; chain breaks are left to :meth:`verify`."""
        ledger = cls()
        for line in lines:
            ledger._entries.append(parse_line(line))
            ledger._lines.append(line)
        return ledger

    def append(
        self,
        old_hash: Optional[str],
        new_hash: str,
        diff: FormDiff = EMPTY_DIFF,
        evidence: Any = None,
        decision_id: int = 0,
    ) -> tuple[LedgerEntry, str]:
        """Append a new entry; returns it with its canonical line."""
        entry = LedgerEntry(
            seq=len(self._entries),
            old_hash=old_hash,
            new_hash=new_hash,
            diff=diff,
            evidence=evidence,
            decision_id=decision_id,
            prev_entry_hash=self.head,
        )
        line = canonical_line(entry)
        self._entries.append(entry)
        self._lines.append(line)
        logger.info("ledger_appended", seq=entry.seq, new_hash=new_hash[:12], decision_id=decision_id)
        return entry, line

    def truncate(self, length: int) -> None:
        """Drop every entry from ``length`` on; undoes an append whose write failed."""
        del self._entries[length:]
        del self._lines[length:]
        logger.info("ledger_truncated", length=length)

    @property
    def head(self) -> str:
        """Digest of the last line; the zero digest when empty."""
        return line_digest(self._lines[-1]) if self._lines else ZERO_DIGEST

    def verify(self) -> Optional[int]:
        return verify_lines(self._lines, self.head)

    def lines(self) -> tuple:
        return tuple(self._lines)

    def entries(self) -> tuple:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[LedgerEntry]:
        return iter(tuple(self._entries))

    def __getitem__(self, seq: int) -> LedgerEntry:
        return self._entries[seq]
