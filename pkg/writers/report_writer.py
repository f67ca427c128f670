"""Human-readable renderings of reports, diffs, summaries and ledgers."""
import sys
from pathlib import Path
from typing import Any, Iterable

# Handle imports for both module and direct execution
try:
    from ..models.capability import render_caps
    from ..models.decision import InspectionReport
    from ..models.form import Form
    from ..models.form_diff import FormDiff
    from ..models.machine import LedgerEntry
    from ..models.values import Expression, QuoteTemplate
    from .form_text import FormTextWriter
except ImportError:
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from models.capability import render_caps
    from models.decision import InspectionReport
    from models.form import Form
    from models.form_diff import FormDiff
    from models.machine import LedgerEntry
    from models.values import Expression, QuoteTemplate
    from writers.form_text import FormTextWriter


class ReportWriter:
    """Formats kernel results for the terminal."""

    # Long hashes are shortened in listings; `ledger show` prints them whole.
    SHORT_HASH = 12

    @classmethod
    def format_report(cls, report: InspectionReport) -> str:
        passed = sum(1 for check in report.checks if check.passed)
        lines = [
            f"form {report.form_hash}",
            f"verdict: {report.verdict} ({passed}/{len(report.checks)} checks passed)",
        ]
        for index, check in enumerate(report.checks, start=1):
            mark = "pass" if check.passed else "FAIL"
            detail = f": {check.detail}" if check.detail else ""
            lines.append(f"  {index}. [{mark}] {check.name}{detail}")
        lines.append(f"required caps: {cls._caps(report.required_caps)}")
        lines.append(f"estimated cost: {report.estimated_cost}")
        return "\n".join(lines) + "\n"

    @classmethod
    def format_diff(cls, diff: FormDiff) -> str:
        """One line per entry: ``<op> <path>: <before> -> <after>``."""
        lines = [
            f"{entry.op} {entry.path or '(root)'}: "
            f"{cls.short_value(entry.before)} -> {cls.short_value(entry.after)}"
            for entry in diff
        ]
        return "".join(line + "\n" for line in lines)

    @classmethod
    def describe(cls, form: Form, report: InspectionReport) -> str:
        """Summary returned by describe-mode materialization."""
        types = form.step_types()
        type_text = ", ".join(f"{kind.value}: {types[kind]}" for kind in sorted(types, key=lambda k: k.value))
        lines = [
            f"machine: {form.name or '(unnamed)'}",
            f"steps: {form.count_steps()}",
            f"step types: {type_text or 'none'}",
            f"required caps: {cls._caps(report.required_caps)}",
            f"estimated cost: {report.estimated_cost}",
            f"form hash: {report.form_hash}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def format_ledger(cls, entries: Iterable[LedgerEntry]) -> str:
        entries = list(entries)
        noun = "entry" if len(entries) == 1 else "entries"
        lines = [f"{len(entries)} {noun}"]
        for entry in entries:
            lines.append(
                f"{entry.seq}  {cls._short(entry.old_hash)} -> {cls._short(entry.new_hash)}"
                f"  decision {entry.decision_id}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def format_ledger_entry(cls, entry: LedgerEntry) -> str:
        lines = [
            f"seq: {entry.seq}",
            f"old: {entry.old_hash or '-'}",
            f"new: {entry.new_hash}",
            f"decision: {entry.decision_id}",
            f"evidence: {cls.short_value(entry.evidence)}",
            f"prev: {entry.prev_entry_hash}",
            f"diff: {len(entry.diff)} {'entry' if len(entry.diff) == 1 else 'entries'}",
        ]
        body = cls.format_diff(entry.diff)
        return "\n".join(lines) + "\n" + "".join("  " + line + "\n" for line in body.splitlines())

    @classmethod
    def short_value(cls, value: Any) -> str:
        if isinstance(value, Form):
            name = f" {value.name}" if value.name else ""
            return f"<{value.kind.value}{name}>"
        if isinstance(value, QuoteTemplate):
            return "<quote>"
        if isinstance(value, Expression):
            return value.source
        return FormTextWriter.render_value(value)

    @classmethod
    def _caps(cls, caps) -> str:
        return ", ".join(render_caps(caps)) or "none"

    @classmethod
    def _short(cls, digest) -> str:
        return digest[:cls.SHORT_HASH] if digest else "-"
