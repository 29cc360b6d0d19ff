"""Registration-paper comparison: retrieval-backed, provider-judged reports."""

__version__ = "0.1.0"
