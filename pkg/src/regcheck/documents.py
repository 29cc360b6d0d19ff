"""Common document shapes produced by ingestion and consumed downstream."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ValidationError

PAPER = "paper"
REGISTRATION = "registration"

UPLOAD = "upload"
REGISTRY = "registry"

UPLOAD_FORMATS = ("pdf", "docx", "plaintext")


@dataclass(frozen=True)
class SourceDescriptor:
    """Where a document came from and how it arrived."""

    kind: str  # "paper" | "registration"
    origin: str  # "upload" | "registry"
    format: str  # "pdf" | "docx" | "plaintext" | "registry_json"
    registry_id: Optional[str] = None
    filename: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in (PAPER, REGISTRATION):
            raise ValidationError(f"unknown document kind: {self.kind!r}")
        if self.origin == REGISTRY:
            if not self.registry_id:
                raise ValidationError("registry origin requires a registry_id")
            if self.format != "registry_json":
                raise ValidationError("registry origin implies registry_json format")
        elif self.origin == UPLOAD:
            if self.format not in UPLOAD_FORMATS:
                raise ValidationError(f"unsupported upload format: {self.format!r}")
        else:
            raise ValidationError(f"unknown origin: {self.origin!r}")


@dataclass(frozen=True)
class Section:
    heading: str
    body: str


@dataclass(frozen=True)
class SectionedDocument:
    """Normalized text of one source as ordered, labeled sections."""

    source: SourceDescriptor
    sections: tuple[Section, ...]
    char_count: int = field(default=-1)

    def __post_init__(self) -> None:
        total = sum(len(s.body) for s in self.sections)
        if self.char_count == -1:
            object.__setattr__(self, "char_count", total)
        elif self.char_count != total:
            raise ValidationError("char_count does not match section bodies")
        for s in self.sections:
            if not s.body:
                raise ValidationError("section bodies must be non-empty")

    def full_text(self) -> str:
        return "\n\n".join(s.body for s in self.sections)


def make_document(source: SourceDescriptor, sections: list[tuple[str, str]]) -> SectionedDocument:
    """Build a document, dropping sections whose body is empty after stripping."""
    kept = [Section(h.strip(), b.strip()) for h, b in sections if b and b.strip()]
    return SectionedDocument(source=source, sections=tuple(kept))
