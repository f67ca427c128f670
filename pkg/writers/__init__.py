"""Canonical text, JSON interchange and report writers."""
from .form_json import from_json, to_json
from .form_text import FormTextWriter, form_hash, print_form, to_text
from .report_writer import ReportWriter

__all__ = ["FormTextWriter", "ReportWriter", "form_hash", "from_json", "print_form", "to_json", "to_text"]
