"""Surface syntax and expression parsers."""
from .expr_parser import parse_expression
from .source_cleaner import SourceCleaner
from .surface_parser import SourceNode, SpliceMark, build_form, parse_quote, parse_source

__all__ = [
    "SourceCleaner",
    "SourceNode",
    "SpliceMark",
    "build_form",
    "parse_expression",
    "parse_quote",
    "parse_source",
]
