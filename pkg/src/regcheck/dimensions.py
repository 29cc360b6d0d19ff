"""Comparison dimensions: built-in defaults and user-defined label/definition pairs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import ValidationError

MAX_LABEL_LEN = 120
MAX_DEFINITION_LEN = 2000


@dataclass(frozen=True)
class Dimension:
    label: str
    definition: str
    builtin: bool = False

    def __post_init__(self) -> None:
        if not self.label or not self.label.strip():
            raise ValidationError("dimension label must be non-empty")
        if len(self.label) > MAX_LABEL_LEN:
            raise ValidationError(f"dimension label exceeds {MAX_LABEL_LEN} characters")
        if len(self.definition) > MAX_DEFINITION_LEN:
            raise ValidationError(f"dimension definition exceeds {MAX_DEFINITION_LEN} characters")
        if not self.builtin and not self.definition.strip():
            raise ValidationError("custom dimensions require a definition")


def _load_dimension_file(text: str, builtin: bool) -> list[Dimension]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"dimension file is not valid JSON: {exc}") from exc
    records = payload.get("dimensions") if isinstance(payload, dict) else payload
    if not isinstance(records, list):
        raise ValidationError("dimension file must hold a list of records")
    dims = []
    for record in records:
        if not isinstance(record, dict) or "label" not in record:
            raise ValidationError("each dimension record needs a label")
        dims.append(
            Dimension(
                label=str(record["label"]),
                definition=str(record.get("definition", "")),
                builtin=builtin,
            )
        )
    ensure_unique_labels(dims)
    return dims


def default_dimensions() -> list[Dimension]:
    """The built-in dimension set shipped as package data."""
    text = resources.files("regcheck.data").joinpath("default_dimensions.json").read_text("utf-8")
    return _load_dimension_file(text, builtin=True)


def load_dimensions(path: str | Path) -> list[Dimension]:
    """Load user dimensions from a file in the same format as the defaults."""
    return _load_dimension_file(Path(path).read_text("utf-8"), builtin=False)


def ensure_unique_labels(dims: Iterable[Dimension]) -> None:
    seen: set[str] = set()
    for d in dims:
        key = d.label.strip().lower()
        if key in seen:
            raise ValidationError(f"duplicate dimension label: {d.label!r}")
        seen.add(key)


@lru_cache(maxsize=1)
def _default_definitions() -> dict[str, str]:
    return {d.label.strip().lower(): d.definition for d in default_dimensions()}


def resolve_definition(dimension: Dimension) -> str:
    """The effective definition: the dimension's own, or the built-in default."""
    if dimension.definition.strip():
        return dimension.definition
    if dimension.builtin:
        return _default_definitions().get(dimension.label.strip().lower(), "")
    return dimension.definition


def form_query(dimension: Dimension) -> str:
    """Retrieval query text for a dimension: label plus its definition."""
    return f"{dimension.label}: {resolve_definition(dimension)}"
