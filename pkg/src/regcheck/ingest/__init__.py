"""Document acquisition: uploads and registry fetches to SectionedDocuments."""

from __future__ import annotations

from typing import Optional

from ..documents import PAPER, REGISTRATION, UPLOAD, SectionedDocument, SourceDescriptor
from ..errors import UnparseableDocument, UnsupportedFormat

from .docx import parse_docx
from .grobid import GrobidClient, parse_pdf_with_grobid, sections_from_tei
from .pdftext import parse_pdf
from .plaintext import parse_plaintext
from .registry import (
    RegistryClient,
    RegistryRecord,
    fetch_registration,
    flatten_json_leaves,
    looks_like_nct_id,
    normalize_nct_id,
    registry_record_to_document,
)

GROBID = "grobid"
PLAINTEXT_FALLBACK = "plaintext_fallback"

__all__ = [
    "GROBID",
    "PLAINTEXT_FALLBACK",
    "GrobidClient",
    "RegistryClient",
    "RegistryRecord",
    "fetch_registration",
    "flatten_json_leaves",
    "format_from_filename",
    "looks_like_nct_id",
    "normalize_nct_id",
    "parse_paper_upload",
    "parse_registration_upload",
    "registry_record_to_document",
    "sections_from_tei",
]


def format_from_filename(filename: str) -> str:
    name = filename.lower()
    if name.endswith(".pdf"):
        return "pdf"
    if name.endswith(".docx"):
        return "docx"
    if name.endswith((".txt", ".text", ".md")):
        return "plaintext"
    raise UnsupportedFormat(f"cannot infer format of {filename!r}")


def parse_paper_upload(
    data: bytes,
    format: str,
    parser_choice: str = GROBID,
    grobid_client: Optional[GrobidClient] = None,
    filename: Optional[str] = None,
) -> SectionedDocument:
    """Parse an uploaded paper into sections.

    PDFs go through the parser service under the ``grobid`` choice and through
    local embedded-text extraction under ``plaintext_fallback``.
    """
    if format not in ("pdf", "docx", "plaintext"):
        raise UnsupportedFormat(f"unsupported upload format: {format!r}")
    if not data:
        raise UnparseableDocument("empty upload")
    source = SourceDescriptor(kind=PAPER, origin=UPLOAD, format=format, filename=filename)
    if format == "pdf":
        if parser_choice == GROBID:
            if grobid_client is None:
                raise UnsupportedFormat("no parser service configured for PDF papers")
            return parse_pdf_with_grobid(data, source, grobid_client)
        if parser_choice == PLAINTEXT_FALLBACK:
            return parse_pdf(data, source)
        raise UnsupportedFormat(f"unknown parser choice: {parser_choice!r}")
    if format == "docx":
        return parse_docx(data, source)
    if format == "plaintext":
        return parse_plaintext(data, source)
    raise UnsupportedFormat(f"unsupported upload format: {format!r}")


def parse_registration_upload(data: bytes, format: str, filename: Optional[str] = None) -> SectionedDocument:
    """Parse an uploaded registration.

    Registrations are form-like, so PDFs always use embedded-text extraction
    rather than the layout parser service.
    """
    if format not in ("pdf", "docx", "plaintext"):
        raise UnsupportedFormat(f"unsupported upload format: {format!r}")
    if not data:
        raise UnparseableDocument("empty upload")
    source = SourceDescriptor(kind=REGISTRATION, origin=UPLOAD, format=format, filename=filename)
    if format == "pdf":
        return parse_pdf(data, source)
    if format == "docx":
        return parse_docx(data, source)
    return parse_plaintext(data, source)
