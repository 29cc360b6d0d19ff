"""Embedded text-layer extraction from PDF bytes.

Covers digitally-produced PDFs whose content streams use the standard
text-showing operators (Tj, TJ, ', ") with literal or hex strings, optionally
Flate-compressed. There is no layout model and no OCR: a scanned PDF without
a text layer is rejected as unparseable. Multi-byte CID-encoded text is out
of scope; papers needing full layout analysis go through the remote parser
service instead.
"""

from __future__ import annotations

import base64
import re
import zlib

from ..documents import SectionedDocument, SourceDescriptor, make_document
from ..errors import UnparseableDocument

from .plaintext import sections_from_plaintext

_STREAM_START_RE = re.compile(rb"stream\r?\n")
_FILTER_RE = re.compile(rb"/(ASCII85Decode|ASCIIHexDecode|FlateDecode|LZWDecode|DCTDecode|CCITTFaxDecode)")

_ESCAPES = {
    b"n": b"\n",
    b"r": b"\r",
    b"t": b"\t",
    b"b": b"\b",
    b"f": b"\f",
    b"(": b"(",
    b")": b")",
    b"\\": b"\\",
}


def _decode_literal(raw: bytes) -> bytes:
    """Resolve backslash escapes inside a ( ) string literal."""
    out = bytearray()
    i = 0
    while i < len(raw):
        ch = raw[i : i + 1]
        if ch != b"\\":
            out += ch
            i += 1
            continue
        nxt = raw[i + 1 : i + 2]
        if nxt in _ESCAPES:
            out += _ESCAPES[nxt]
            i += 2
        elif nxt.isdigit():
            digits = raw[i + 1 : i + 4]
            octal = b""
            for d in digits:
                if bytes([d]).isdigit() and int(bytes([d])) < 8:
                    octal += bytes([d])
                else:
                    break
            out.append(int(octal, 8) & 0xFF)
            i += 1 + len(octal)
        elif nxt in (b"\n", b"\r"):
            i += 2  # line continuation
        else:
            out += nxt
            i += 2
    return bytes(out)


def _extract_from_content(content: bytes) -> list[str]:
    """Pull shown text from one content stream, in operator order."""
    lines: list[str] = []
    current: list[str] = []
    pending: list[str] = []  # string operands awaiting their operator
    i = 0
    n = len(content)

    def break_line() -> None:
        if current:
            lines.append(" ".join(current))
            current.clear()

    while i < n:
        ch = content[i : i + 1]
        if ch == b"(":
            depth = 1
            j = i + 1
            start = j
            buf = bytearray()
            while j < n and depth > 0:
                cj = content[j : j + 1]
                if cj == b"\\":
                    buf += content[j : j + 2]
                    j += 2
                    continue
                if cj == b"(":
                    depth += 1
                elif cj == b")":
                    depth -= 1
                    if depth == 0:
                        break
                buf += cj
                j += 1
            pending.append(_decode_literal(bytes(buf)).decode("latin-1"))
            i = j + 1
        elif ch == b"<" and content[i : i + 2] != b"<<":
            end = content.find(b">", i)
            if end == -1:
                break
            hexdigits = re.sub(rb"\s", b"", content[i + 1 : end])
            if len(hexdigits) % 2:
                hexdigits += b"0"
            try:
                pending.append(bytes.fromhex(hexdigits.decode("ascii")).decode("latin-1"))
            except ValueError:
                pass
            i = end + 1
        elif ch == b"<":
            i += 2
        elif ch.isalpha() or ch in (b"'", b'"'):
            match = re.match(rb"[A-Za-z'\"*]+", content[i:])
            op = match.group(0) if match else ch
            if op in (b"Tj", b"TJ"):
                text = "".join(pending)
                if text.strip():
                    current.append(text.strip())
                pending.clear()
            elif op in (b"'", b'"'):
                break_line()
                text = "".join(pending)
                if text.strip():
                    current.append(text.strip())
                pending.clear()
            elif op in (b"Td", b"TD", b"T*", b"Tm", b"ET", b"BT"):
                break_line()
                pending.clear()
            elif op.isalpha():
                pending.clear()
            i += len(op)
        else:
            i += 1
    break_line()
    return lines


def _decode_stream(header: bytes, body: bytes) -> bytes | None:
    """Apply the declared filter chain; None when the stream is not text-usable."""
    for name in _FILTER_RE.findall(header):
        if name == b"ASCII85Decode":
            payload = body.strip()
            if payload.startswith(b"<~"):
                payload = payload[2:]
            if not payload.endswith(b"~>"):
                payload += b"~>"
            try:
                body = base64.a85decode(payload, adobe=True)
            except ValueError:
                return None
        elif name == b"ASCIIHexDecode":
            payload = body.strip().rstrip(b">")
            try:
                body = bytes.fromhex(payload.decode("ascii"))
            except (ValueError, UnicodeDecodeError):
                return None
        elif name == b"FlateDecode":
            try:
                body = zlib.decompressobj().decompress(body)  # tolerate trailing newline
            except zlib.error:
                return None
        else:
            return None  # image or unsupported compression
    return body


def extract_pdf_text(data: bytes) -> str:
    if not data.startswith(b"%PDF"):
        raise UnparseableDocument("input is not a PDF file")
    lines: list[str] = []
    for match in _STREAM_START_RE.finditer(data):
        end = data.find(b"endstream", match.end())
        if end == -1:
            continue
        object_start = data.rfind(b"obj", 0, match.start())
        header = data[object_start : match.start()] if object_start != -1 else b""
        body = _decode_stream(header, data[match.end() : end])
        if body is None or b"BT" not in body:
            continue
        lines.extend(_extract_from_content(body))
    return "\n".join(lines)


def parse_pdf(data: bytes, source: SourceDescriptor) -> SectionedDocument:
    text = extract_pdf_text(data)
    if not any(ch.isalnum() for ch in text):
        raise UnparseableDocument("no embedded text layer found in PDF")
    doc = make_document(source, sections_from_plaintext(text))
    if not doc.sections:
        raise UnparseableDocument("no non-empty sections in PDF text")
    return doc
