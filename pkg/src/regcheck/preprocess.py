"""Document normalization: reference stripping, layout cleanup, study filtering.

Multi-study papers are reduced to the general introduction, the target study,
and the trailing general discussion. Back-references from the retained study
to dropped studies ("same as the previous experiment") are resolved through a
provider flow whose quotes are kept only when they verify as verbatim
substrings of the full document — a machine-checkable anti-hallucination gate.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Optional

from .chunker import segment_sentences, tokenize
from .documents import SectionedDocument, make_document
from .errors import ProviderUnavailable, SchemaViolation, TargetStudyNotFound, ValidationError
from .judge import JudgementProvider, build_cross_study_prompt, parse_cross_study_response
from .logging_utils import log_event

logger = logging.getLogger(__name__)

REFERENCE_HEADINGS = frozenset(
    {"references", "bibliography", "literature cited", "works cited", "reference list"}
)
DISCUSSION_HEADINGS = frozenset({"general discussion", "overall discussion", "discussion"})

RESOLVED_SECTION_HEADING = "Resolved cross-study details"

_NUMBER_WORDS = ("one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten")
_STUDY_IDENT = rf"(?:\d+|[ivxlcdm]+\b|[a-z]\b|(?:{'|'.join(_NUMBER_WORDS)})\b)"
_STUDY_HEADING_RE = re.compile(rf"^(?:study|experiment|exp\.?)\s+{_STUDY_IDENT}", re.IGNORECASE)

_LEADING_ENUMERATION_RE = re.compile(r"^(?:[0-9]+|[ivxlcdm]+|[a-z])[.):]\s+", re.IGNORECASE)

_DEHYPHENATE_RE = re.compile(r"([^\W\d_])-[ \t]*\n[ \t]*([^\W\d_])")

_RELATIVE_IDENTS = frozenset(
    {"previous", "prior", "earlier", "preceding", "last", "first", "second", "third", "same"}
)


@dataclass(frozen=True)
class StudySelector:
    multi_study: bool = False
    target_label: Optional[str] = None

    def __post_init__(self) -> None:
        if self.multi_study and not (self.target_label and self.target_label.strip()):
            raise ValidationError("multi-study papers need a target study label")


def normalize_heading(heading: str) -> str:
    text = heading.strip().lower()
    text = _LEADING_ENUMERATION_RE.sub("", text)
    return text.rstrip(":.").strip()


def normalize_layout(text: str) -> str:
    """Collapse intra-paragraph whitespace, de-hyphenate line breaks, keep paragraphs."""
    paragraphs = []
    for paragraph in re.split(r"\n\s*\n", text):
        paragraph = _DEHYPHENATE_RE.sub(r"\1\2", paragraph)
        paragraph = " ".join(paragraph.split())
        if paragraph:
            paragraphs.append(paragraph)
    return "\n\n".join(paragraphs)


def strip_references(doc: SectionedDocument) -> SectionedDocument:
    """Drop reference-list sections and normalize layout everywhere else."""
    kept: list[tuple[str, str]] = []
    removing = False
    for section in doc.sections:
        heading = normalize_heading(section.heading)
        if heading in REFERENCE_HEADINGS:
            removing = True
            continue
        if removing and not heading:
            continue  # unheaded continuation of the reference list
        removing = False
        kept.append((section.heading, normalize_layout(section.body)))
    return make_document(doc.source, kept)


def _is_study_heading(heading: str) -> bool:
    return bool(_STUDY_HEADING_RE.match(normalize_heading(heading)))


def _matches_target(heading: str, target_label: str) -> bool:
    heading_tokens = [t.lower() for t in tokenize(normalize_heading(heading))]
    target_tokens = [t.lower() for t in tokenize(target_label)]
    if not target_tokens:
        return False
    for start in range(len(heading_tokens) - len(target_tokens) + 1):
        if heading_tokens[start : start + len(target_tokens)] == target_tokens:
            return True
    return False


def filter_to_study(doc: SectionedDocument, selector: StudySelector) -> SectionedDocument:
    """Reduce a multi-study document to intro, target study, and discussion."""
    if not selector.multi_study:
        return doc

    sections = doc.sections
    study_indices = [i for i, s in enumerate(sections) if _is_study_heading(s.heading)]
    if not study_indices:
        raise TargetStudyNotFound(f"no study headings found for target {selector.target_label!r}")

    target_index = next(
        (
            i
            for i in study_indices
            if _matches_target(sections[i].heading, selector.target_label or "")
        ),
        None,
    )
    if target_index is None:
        raise TargetStudyNotFound(f"no heading matches target {selector.target_label!r}")

    first_study = study_indices[0]
    last_study = study_indices[-1]
    target_end = next((i for i in study_indices if i > target_index), len(sections))

    def _is_trailing_boundary(heading: str) -> bool:
        normalized = normalize_heading(heading)
        return (
            normalized in DISCUSSION_HEADINGS
            or normalized.startswith("appendix")
            or normalized.startswith("appendices")
            or normalized.startswith("supplement")
        )

    trailing_start = next(
        (i for i in range(last_study + 1, len(sections)) if _is_trailing_boundary(sections[i].heading)),
        None,
    )
    if trailing_start is not None:
        target_end = min(target_end, trailing_start) if target_index == last_study else target_end

    retained_indices = set(range(0, first_study)) | set(range(target_index, target_end))
    if trailing_start is not None:
        retained_indices |= set(range(trailing_start, len(sections)))

    kept = [(sections[i].heading, sections[i].body) for i in sorted(retained_indices)]
    return make_document(doc.source, kept)


def find_back_reference_sentences(doc: SectionedDocument) -> list[str]:
    """Sentences whose phrasing points back to another study in the paper."""
    triggers = []
    for sentence in segment_sentences(doc):
        tokens = [t.lower() for t in tokenize(sentence.text)]
        phrase_positions = []
        for i in range(len(tokens) - 1):
            pair = (tokens[i], tokens[i + 1])
            if pair in (("same", "as"), ("identical", "to"), ("as", "in")):
                phrase_positions.append(i)
        if not phrase_positions:
            continue
        study_positions = []
        for j, token in enumerate(tokens):
            if token not in ("study", "experiment", "studies", "experiments"):
                continue
            before = tokens[j - 1] if j > 0 else ""
            after = tokens[j + 1] if j + 1 < len(tokens) else ""
            idents = _RELATIVE_IDENTS | set(_NUMBER_WORDS)
            if (
                before in idents
                or after in idents
                or before.isdigit()
                or after.isdigit()
                or re.fullmatch(r"[ivxlcdm]+|[a-z]", after or "-")
            ):
                study_positions.append(j)
        if any(abs(j - i) <= 6 for i in phrase_positions for j in study_positions):
            triggers.append(sentence.text)
    return triggers


def _dropped_text(filtered: SectionedDocument, full: SectionedDocument) -> str:
    retained = {(s.heading, s.body) for s in filtered.sections}
    dropped = [s.body for s in full.sections if (s.heading, s.body) not in retained]
    return "\n\n".join(dropped)


def resolve_cross_study_references(
    filtered: SectionedDocument,
    full: SectionedDocument,
    provider: JudgementProvider,
) -> SectionedDocument:
    """Append provider-located details from dropped studies, substring-verified.

    Quotes that do not occur verbatim in the full document are discarded. A
    provider outage skips the flow with a warning; the pipeline continues.
    """
    triggers = find_back_reference_sentences(filtered)
    if not triggers:
        return filtered
    dropped = _dropped_text(filtered, full)
    if not dropped.strip():
        return filtered
    full_text = full.full_text()

    resolved: list[str] = []
    for trigger in triggers:
        bundle = build_cross_study_prompt(trigger, dropped)
        try:
            raw = provider.complete(bundle)
            quotes = parse_cross_study_response(raw)
        except ProviderUnavailable:
            log_event(logger, "preprocess.cross_study_skipped", level=logging.WARNING, error_kind="ProviderUnavailable")
            return filtered
        except SchemaViolation:
            log_event(logger, "preprocess.cross_study_malformed", level=logging.WARNING, error_kind="SchemaViolation")
            continue
        for quote, label in quotes:
            if quote and quote in full_text:
                prefix = f"From {label}: " if label else ""
                resolved.append(f'{prefix}"{quote}"')
            else:
                log_event(logger, "preprocess.unverified_quote_dropped", level=logging.WARNING, count=1)

    if not resolved:
        return filtered
    sections = [(s.heading, s.body) for s in filtered.sections]
    sections.append((RESOLVED_SECTION_HEADING, "\n\n".join(resolved)))
    return make_document(filtered.source, sections)
