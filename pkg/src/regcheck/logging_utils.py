"""Structured logging with a field whitelist.

Document, section, and chunk text must never reach the logs. Every log line
emitted by the pipeline goes through :func:`log_event`, which only accepts
fields named in ``ALLOWED_LOG_FIELDS``; free-form text values are rejected at
call time so a privacy leak fails loudly during development instead of
surfacing in production logs.
"""

from __future__ import annotations

import logging
from typing import Any

ALLOWED_LOG_FIELDS = frozenset(
    {
        "attempt",
        "chunk_count",
        "count",
        "dimension_label",
        "doc_kind",
        "done",
        "duration_ms",
        "error_kind",
        "excerpt_id",
        "format",
        "nct_id",
        "parser",
        "provider_kind",
        "report_id",
        "section_count",
        "status",
        "total",
        "verdict",
    }
)

_MAX_VALUE_LEN = 120


def log_event(logger: logging.Logger, event: str, level: int = logging.INFO, **fields: Any) -> None:
    """Emit one structured log line composed only of whitelisted fields."""
    for key, value in fields.items():
        if key not in ALLOWED_LOG_FIELDS:
            raise ValueError(f"log field {key!r} is not whitelisted")
        if isinstance(value, str) and len(value) > _MAX_VALUE_LEN:
            raise ValueError(f"log field {key!r} value too long for a log line")
    payload = " ".join(f"{k}={fields[k]}" for k in sorted(fields))
    logger.log(level, "%s %s", event, payload)
