"""Sentence-aware, token-bounded, overlapping chunking.

Documents are split into sentences, then sentences are greedily packed into
chunks of at most ``max_tokens`` tokens. Consecutive chunks share the minimal
sentence suffix of the previous chunk whose token sum reaches
``overlap_tokens``; the overlap is dropped when keeping it would push the next
chunk over capacity. A single sentence larger than the capacity is hard-split
at token boundaries into fragments flagged as oversized.

The default token rule is deterministic and language-agnostic: a token is a
maximal run of letters/digits, or a single other non-whitespace character.
A pluggable tokenizer slot exists for model-specific token counts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable

from .documents import SectionedDocument
from .errors import ValidationError

Tokenizer = Callable[[str], list[str]]

# Maximal letter/digit runs (underscore excluded), else one non-space char.
_TOKEN_RE = re.compile(r"[^\W_]+|[^\w\s]|_", re.UNICODE)

_SENTENCE_END = re.compile(r"[.!?]")
_OPENERS = "\"'‘“([{"

# Trailing parts of abbreviations that must not end a sentence. Matched
# case-sensitively so the ordinary words "no"/"ca" still close a sentence.
_ABBREVIATIONS = ("et al", "e.g", "i.e", "Fig", "Dr", "vs", "cf", "No", "ca")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def count_tokens(text: str, tokenizer: Tokenizer = tokenize) -> int:
    """Number of tokens under the default (or supplied) token rule."""
    return len(tokenizer(text))


@dataclass(frozen=True)
class Sentence:
    text: str
    token_count: int
    section_index: int
    ordinal: int


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_kind: str
    text: str
    sentence_span: tuple[int, int]  # (first_ordinal, last_ordinal), inclusive
    token_count: int
    oversized: bool = False


@dataclass(frozen=True)
class ChunkingConfig:
    max_tokens: int = 200
    overlap_tokens: int = 30

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValidationError("max_tokens must be >= 1")
        if not 0 <= self.overlap_tokens < self.max_tokens:
            raise ValidationError("overlap_tokens must satisfy 0 <= overlap < max_tokens")


def _is_protected(text: str, pos: int) -> bool:
    """True when the sentence-ending candidate at ``pos`` must not split."""
    ch = text[pos]
    if ch != ".":
        return False
    # Decimal number: digit on both sides of the period.
    if 0 < pos < len(text) - 1 and text[pos - 1].isdigit() and text[pos + 1].isdigit():
        return True
    before = text[:pos]
    for abbr in _ABBREVIATIONS:
        if before.endswith(abbr):
            start = len(before) - len(abbr)
            if start == 0 or not (before[start - 1].isalpha() or before[start - 1] == "."):
                return True
    # Single-letter initial, e.g. "J. Smith".
    if before and before[-1].isalpha() and before[-1].isupper():
        if len(before) == 1 or not before[-2].isalpha():
            return True
    return False


def _split_paragraph(paragraph: str) -> list[str]:
    """Split one paragraph into sentences by the boundary rule."""
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(paragraph)
    while i < n:
        if _SENTENCE_END.match(paragraph[i]):
            # Absorb immediately following closing punctuation runs of .!?
            j = i
            while j + 1 < n and paragraph[j + 1] in ".!?":
                j += 1
            k = j + 1
            if k < n and paragraph[k].isspace():
                m = k
                while m < n and paragraph[m].isspace():
                    m += 1
                if m < n:
                    nxt = paragraph[m]
                    starts_new = nxt.isupper() or nxt.isdigit() or nxt in _OPENERS
                    if starts_new and not _is_protected(paragraph, i):
                        sentences.append(paragraph[start : j + 1].strip())
                        start = m
                        i = m
                        continue
            i = j + 1
        else:
            i += 1
    tail = paragraph[start:].strip()
    if tail:
        sentences.append(tail)
    return [s for s in sentences if s]


def segment_sentences(doc: SectionedDocument, tokenizer: Tokenizer = tokenize) -> list[Sentence]:
    """Segment every section body into sentences with document-wide ordinals.

    Paragraph breaks (blank lines) always end a sentence. Joining the sentence
    texts of one section with single spaces reconstructs the section body up
    to normalized whitespace.
    """
    sentences: list[Sentence] = []
    ordinal = 0
    for section_index, section in enumerate(doc.sections):
        for paragraph in re.split(r"\n\s*\n", section.body):
            paragraph = " ".join(paragraph.split())
            if not paragraph:
                continue
            for text in _split_paragraph(paragraph):
                toks = tokenizer(text)
                if not toks:
                    continue
                sentences.append(
                    Sentence(
                        text=text,
                        token_count=len(toks),
                        section_index=section_index,
                        ordinal=ordinal,
                    )
                )
                ordinal += 1
    return sentences


def _chunk_id(doc_kind: str, n: int) -> str:
    if doc_kind == "registration":
        return f"R{n}"
    if doc_kind == "paper":
        return f"P{n}"
    raise ValidationError(f"unknown doc_kind: {doc_kind!r}")


def _hard_split(sentence: Sentence, doc_kind: str, config: ChunkingConfig,
                tokenizer: Tokenizer, start_n: int) -> list[Chunk]:
    """Split one oversized sentence into flagged fragments at token boundaries."""
    spans: list[tuple[int, int]] = []
    for match in _TOKEN_RE.finditer(sentence.text) if tokenizer is tokenize else ():
        spans.append(match.span())
    if not spans:
        # Custom tokenizer: fall back to whitespace-delimited word positions.
        pos = 0
        for word in sentence.text.split():
            begin = sentence.text.index(word, pos)
            spans.append((begin, begin + len(word)))
            pos = begin + len(word)
    fragments: list[Chunk] = []
    n = start_n
    for i in range(0, len(spans), config.max_tokens):
        group = spans[i : i + config.max_tokens]
        text = sentence.text[group[0][0] : group[-1][1]]
        fragments.append(
            Chunk(
                chunk_id=_chunk_id(doc_kind, n),
                doc_kind=doc_kind,
                text=text,
                sentence_span=(sentence.ordinal, sentence.ordinal),
                token_count=count_tokens(text, tokenizer),
                oversized=True,
            )
        )
        n += 1
    return fragments


def chunk_document(
    sentences: Iterable[Sentence],
    config: ChunkingConfig,
    doc_kind: str,
    tokenizer: Tokenizer = tokenize,
) -> list[Chunk]:
    """Greedily pack sentences into overlapping, capacity-bounded chunks."""
    items = list(sentences)
    chunks: list[Chunk] = []
    window: list[Sentence] = []  # sentences of the chunk being built
    idx = 0

    def flush() -> None:
        if not window:
            return
        text = " ".join(s.text for s in window)
        chunks.append(
            Chunk(
                chunk_id=_chunk_id(doc_kind, len(chunks) + 1),
                doc_kind=doc_kind,
                text=text,
                sentence_span=(window[0].ordinal, window[-1].ordinal),
                token_count=sum(s.token_count for s in window),
            )
        )

    def overlap_suffix() -> list[Sentence]:
        """Minimal suffix of the current window reaching the overlap budget."""
        total = 0
        suffix: list[Sentence] = []
        for s in reversed(window):
            suffix.insert(0, s)
            total += s.token_count
            if total >= config.overlap_tokens:
                return suffix
        return []

    while idx < len(items):
        nxt = items[idx]
        if nxt.token_count > config.max_tokens:
            flush()
            window = []
            chunks.extend(_hard_split(nxt, doc_kind, config, tokenizer, len(chunks) + 1))
            idx += 1
            continue
        current = sum(s.token_count for s in window)
        if current + nxt.token_count <= config.max_tokens:
            window.append(nxt)
            idx += 1
            continue
        flush()
        suffix = overlap_suffix()
        if suffix and sum(s.token_count for s in suffix) + nxt.token_count > config.max_tokens:
            suffix = []  # capacity wins over overlap
        window = list(suffix)

    flush()
    return chunks
