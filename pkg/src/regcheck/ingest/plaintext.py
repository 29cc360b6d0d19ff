"""Plaintext sectioning by a blank-line and short-line heading heuristic."""

from __future__ import annotations

from ..chunker import tokenize
from ..documents import SectionedDocument, SourceDescriptor, make_document
from ..errors import UnparseableDocument

MAX_HEADING_TOKENS = 8
_SENTENCE_PUNCTUATION = (".", "!", "?", ":", ";", ",")


def is_heading_line(block: str) -> bool:
    """A heading is a single short line without sentence-ending punctuation.

    Blocks are blank-line delimited, so every block is already preceded and
    followed by blank lines (or the document edge).
    """
    if "\n" in block.strip():
        return False
    line = block.strip()
    if not line or line.endswith(_SENTENCE_PUNCTUATION):
        return False
    return len(tokenize(line)) <= MAX_HEADING_TOKENS


def sections_from_plaintext(text: str) -> list[tuple[str, str]]:
    """Group blank-line-delimited blocks under detected headings.

    Blocks before any heading each become their own unheaded section;
    consecutive body blocks after a heading join into one section body with
    paragraph breaks preserved.
    """
    blocks = [b for b in _split_blocks(text) if b.strip()]
    sections: list[tuple[str, str]] = []
    heading: str | None = None
    body: list[str] = []
    for block in blocks:
        if is_heading_line(block):
            if heading is not None or body:
                _push(sections, heading, body)
            heading = block.strip()
            body = []
        elif heading is None:
            sections.append(("", block.strip()))
        else:
            body.append(block.strip())
    if heading is not None or body:
        _push(sections, heading, body)
    return sections


def _split_blocks(text: str) -> list[str]:
    blocks: list[str] = []
    current: list[str] = []
    for line in text.splitlines():
        if line.strip():
            current.append(line)
        elif current:
            blocks.append("\n".join(current))
            current = []
    if current:
        blocks.append("\n".join(current))
    return blocks


def _push(sections: list[tuple[str, str]], heading: str | None, body: list[str]) -> None:
    if body:
        sections.append((heading or "", "\n\n".join(body)))
    # A heading with no following body text yields no section: section bodies
    # must be non-empty.


def parse_plaintext(data: bytes, source: SourceDescriptor) -> SectionedDocument:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        text = data.decode("latin-1")
    if not text.strip():
        raise UnparseableDocument("no extractable text in plaintext input")
    doc = make_document(source, sections_from_plaintext(text))
    if not doc.sections:
        raise UnparseableDocument("no non-empty sections in plaintext input")
    return doc
