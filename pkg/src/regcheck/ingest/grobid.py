"""Client for a GROBID-protocol parser service (PDF in, TEI XML out).

Targets the processFulltextDocument route. Figure and table markup is
dropped from the TEI, but figure captions are kept as body text since they
often state sample sizes.
"""

from __future__ import annotations

from typing import Optional
from xml.etree import ElementTree

import httpx

from ..documents import SectionedDocument, SourceDescriptor, make_document
from ..errors import ParserServiceUnavailable, UnparseableDocument

_TEI = "{http://www.tei-c.org/ns/1.0}"


class GrobidClient:
    def __init__(
        self,
        base_url: str,
        timeout: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self._url = base_url.rstrip("/") + "/api/processFulltextDocument"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def process_fulltext(self, pdf_bytes: bytes, filename: str = "upload.pdf") -> str:
        try:
            response = self._client.post(
                self._url,
                files={"input": (filename, pdf_bytes, "application/pdf")},
            )
        except httpx.HTTPError as exc:
            raise ParserServiceUnavailable(f"parser service unreachable: {exc}") from exc
        if response.status_code >= 500 or response.status_code == 503:
            raise ParserServiceUnavailable(f"parser service returned {response.status_code}")
        if response.status_code != 200 or not response.text.strip():
            raise UnparseableDocument(f"parser service could not extract text (status {response.status_code})")
        return response.text


def _element_text(element: ElementTree.Element) -> str:
    parts = [piece.strip() for piece in element.itertext() if piece and piece.strip()]
    return " ".join(parts)


def _div_body(div: ElementTree.Element) -> str:
    paragraphs: list[str] = []
    for child in div:
        tag = child.tag.removeprefix(_TEI)
        if tag == "head":
            continue
        if tag == "figure":
            caption = child.find(f"{_TEI}figDesc")
            if caption is not None:
                text = _element_text(caption)
                if text:
                    paragraphs.append(text)
            continue
        if tag == "table":
            continue
        text = _element_text(child)
        if text:
            paragraphs.append(text)
    return "\n\n".join(paragraphs)


def sections_from_tei(tei_xml: str) -> list[tuple[str, str]]:
    """Title, abstract, and body divisions of a TEI document, in order."""
    try:
        root = ElementTree.fromstring(tei_xml)
    except ElementTree.ParseError as exc:
        raise UnparseableDocument(f"parser returned malformed TEI: {exc}") from exc

    sections: list[tuple[str, str]] = []
    title = root.find(f"{_TEI}teiHeader/{_TEI}fileDesc/{_TEI}titleStmt/{_TEI}title")
    if title is not None:
        text = _element_text(title)
        if text:
            sections.append(("Title", text))
    abstract = root.find(f"{_TEI}teiHeader/{_TEI}profileDesc/{_TEI}abstract")
    if abstract is not None:
        text = _element_text(abstract)
        if text:
            sections.append(("Abstract", text))
    body = root.find(f"{_TEI}text/{_TEI}body")
    if body is not None:
        for div in body.findall(f"{_TEI}div"):
            head = div.find(f"{_TEI}head")
            heading = _element_text(head) if head is not None else ""
            text = _div_body(div)
            if text:
                sections.append((heading, text))
    return sections


def parse_pdf_with_grobid(data: bytes, source: SourceDescriptor, client: GrobidClient) -> SectionedDocument:
    tei = client.process_fulltext(data, source.filename or "upload.pdf")
    doc = make_document(source, sections_from_tei(tei))
    if not doc.sections:
        raise UnparseableDocument("parser returned no usable sections")
    return doc
