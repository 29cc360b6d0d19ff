"""docx extraction: paragraph text from the archive's main document part.

Paragraphs styled as headings open new sections; tracked changes are taken as
accepted (insertions kept, deletions ignored).
"""

from __future__ import annotations

import zipfile
from io import BytesIO
from xml.etree import ElementTree

from ..documents import SectionedDocument, SourceDescriptor, make_document
from ..errors import UnparseableDocument

_W = "{http://schemas.openxmlformats.org/wordprocessingml/2006/main}"


def _paragraph_text(paragraph: ElementTree.Element) -> str:
    parts: list[str] = []
    for node in paragraph.iter():
        if node.tag == f"{_W}delText":
            continue
        if node.tag == f"{_W}t" and node.text:
            # Text inside w:del runs is tagged delText; plain w:t under w:ins
            # or regular runs is accepted content.
            parts.append(node.text)
        elif node.tag in (f"{_W}tab",):
            parts.append(" ")
    return "".join(parts).strip()


def _is_heading(paragraph: ElementTree.Element) -> bool:
    style = paragraph.find(f"{_W}pPr/{_W}pStyle")
    if style is None:
        return False
    value = style.get(f"{_W}val", "")
    return value.lower().startswith("heading") or value.lower() == "title"


def extract_docx_sections(data: bytes) -> list[tuple[str, str]]:
    try:
        with zipfile.ZipFile(BytesIO(data)) as archive:
            xml_bytes = archive.read("word/document.xml")
    except (zipfile.BadZipFile, KeyError) as exc:
        raise UnparseableDocument(f"not a readable docx archive: {exc}") from exc
    try:
        root = ElementTree.fromstring(xml_bytes)
    except ElementTree.ParseError as exc:
        raise UnparseableDocument(f"malformed document XML: {exc}") from exc

    sections: list[tuple[str, str]] = []
    heading: str | None = None
    body: list[str] = []

    def push() -> None:
        if body:
            sections.append((heading or "", "\n\n".join(body)))

    for paragraph in root.iter(f"{_W}p"):
        text = _paragraph_text(paragraph)
        if not text:
            continue
        if _is_heading(paragraph):
            push()
            heading = text
            body = []
        else:
            body.append(text)
    push()
    return sections


def parse_docx(data: bytes, source: SourceDescriptor) -> SectionedDocument:
    doc = make_document(source, extract_docx_sections(data))
    if not doc.sections:
        raise UnparseableDocument("no extractable text in docx input")
    return doc
