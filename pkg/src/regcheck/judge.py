"""Per-dimension summaries and deviation judgements from a pluggable provider.

Each dimension is evaluated in its own provider call: the prompt carries the
dimension, the retrieved excerpts from both sources with their IDs, and, when
context chaining is enabled, the outputs of previously evaluated dimensions.
The provider must answer with a single JSON object; a malformed answer earns
exactly one corrective retry before the dimension degrades to a ``missing``
verdict so the pipeline always completes.
"""

from __future__ import annotations

import json
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import httpx

from .chunker import tokenize
from .dimensions import Dimension, resolve_definition
from .errors import ProviderUnavailable, SchemaViolation
from .logging_utils import log_event
from .retrieval import ScoredExcerpt

logger = logging.getLogger(__name__)

VERDICTS = ("yes", "no", "missing")

DIMENSION_PROMPT = "dimension_analysis"
CROSS_STUDY_PROMPT = "cross_study"

_SYSTEM_INSTRUCTIONS = """\
You compare a study registration against a manuscript along one comparison \
dimension at a time. Work only from the excerpts provided below and quote \
only from provided excerpts; never invent content.

Respond with a single JSON object and nothing else, matching this schema:
{"registration_summary": string, "registration_cited_ids": [string], \
"paper_summary": string, "paper_cited_ids": [string], \
"deviation": "yes" | "no" | "missing", "deviation_information": string}

Set "deviation" to "yes" when the sources clearly differ on this dimension, \
"no" when they agree, and "missing" when one or both sources give \
insufficient evidence. Explain the judgement briefly in \
"deviation_information"."""

_CROSS_STUDY_INSTRUCTIONS = """\
A study section refers back to an earlier study in the same manuscript. \
Locate the referenced detail in the earlier-study text provided below and \
return it as verbatim quotes.

Respond with a single JSON object and nothing else, matching this schema:
{"quotes": [{"quote": string, "study_label": string}]}

Every quote must be copied character-for-character from the provided text. \
Return {"quotes": []} if the detail cannot be found."""

_CORRECTIVE_INSTRUCTION = (
    "Your previous reply did not match the required JSON schema. "
    "Respond again with only the JSON object, exactly as specified."
)


@dataclass(frozen=True)
class DeviationJudgement:
    verdict: str
    deviation_information: str

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise SchemaViolation(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")
        if not self.deviation_information:
            raise SchemaViolation("deviation_information must be non-empty")


@dataclass(frozen=True)
class SourceSummary:
    text: str
    cited_excerpt_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class DimensionAnalysis:
    dimension: Dimension
    registration_excerpts: tuple[ScoredExcerpt, ...]
    paper_excerpts: tuple[ScoredExcerpt, ...]
    registration_summary: SourceSummary
    paper_summary: SourceSummary
    judgement: DeviationJudgement

    def __post_init__(self) -> None:
        for excerpt in self.registration_excerpts:
            if not excerpt.chunk_id.startswith("R"):
                raise SchemaViolation(f"registration excerpt with foreign id {excerpt.chunk_id}")
        for excerpt in self.paper_excerpts:
            if not excerpt.chunk_id.startswith("P"):
                raise SchemaViolation(f"paper excerpt with foreign id {excerpt.chunk_id}")


@dataclass(frozen=True)
class ChainContext:
    """Outputs of previously evaluated dimensions, oldest first."""

    enabled: bool = True
    prior: tuple[tuple[str, str, str, str], ...] = ()  # (label, reg summary, paper summary, verdict)

    def with_result(self, analysis: DimensionAnalysis) -> "ChainContext":
        if not self.enabled:
            return self
        entry = (
            analysis.dimension.label,
            analysis.registration_summary.text,
            analysis.paper_summary.text,
            analysis.judgement.verdict,
        )
        return ChainContext(enabled=True, prior=self.prior + (entry,))


@dataclass(frozen=True)
class PromptBundle:
    """A rendered prompt plus the structured inputs it was rendered from.

    Live providers send the rendered messages; offline rule-based providers
    read the structured payload instead of re-parsing prompt text.
    """

    kind: str
    system: str
    user: str
    payload: dict = field(default_factory=dict, compare=False)

    def messages(self) -> list[dict[str, str]]:
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user},
        ]

    def with_corrective_instruction(self) -> "PromptBundle":
        return PromptBundle(
            kind=self.kind,
            system=self.system,
            user=self.user + "\n\n" + _CORRECTIVE_INSTRUCTION,
            payload=self.payload,
        )


class JudgementProvider(Protocol):
    def complete(self, bundle: PromptBundle) -> str:
        """Return the raw text of the model response for one prompt."""
        ...


def _excerpt_block(excerpts: Sequence[ScoredExcerpt]) -> str:
    if not excerpts:
        return "(none)"
    return "\n".join(f"[{e.chunk_id}] {e.text}" for e in excerpts)


def build_prompt(
    dimension: Dimension,
    registration_excerpts: Sequence[ScoredExcerpt],
    paper_excerpts: Sequence[ScoredExcerpt],
    context: ChainContext,
) -> PromptBundle:
    """Deterministic prompt for one dimension evaluation."""
    parts = [
        f"Dimension: {dimension.label}",
        f"Definition: {resolve_definition(dimension)}",
        "",
        "Registration excerpts:",
        _excerpt_block(registration_excerpts),
        "",
        "Paper excerpts:",
        _excerpt_block(paper_excerpts),
    ]
    if context.enabled and context.prior:
        parts.extend(["", "Previously evaluated dimensions:"])
        for position, (label, reg_summary, paper_summary, verdict) in enumerate(context.prior, 1):
            parts.append(f"{position}. {label} — verdict: {verdict}")
            parts.append(f"   Registration summary: {reg_summary}")
            parts.append(f"   Paper summary: {paper_summary}")
    parts.extend(
        [
            "",
            "Summarize the dimension-relevant content of each source, citing the",
            "excerpt IDs you used, then give the deviation judgement.",
        ]
    )
    return PromptBundle(
        kind=DIMENSION_PROMPT,
        system=_SYSTEM_INSTRUCTIONS,
        user="\n".join(parts),
        payload={
            "dimension_label": dimension.label,
            "registration_excerpts": [(e.chunk_id, e.text) for e in registration_excerpts],
            "paper_excerpts": [(e.chunk_id, e.text) for e in paper_excerpts],
            "prior_count": len(context.prior) if context.enabled else 0,
        },
    )


def build_cross_study_prompt(trigger_sentence: str, dropped_text: str) -> PromptBundle:
    user = "\n".join(
        [
            f"Back-reference sentence: {trigger_sentence}",
            "",
            "Earlier-study text:",
            dropped_text,
        ]
    )
    return PromptBundle(
        kind=CROSS_STUDY_PROMPT,
        system=_CROSS_STUDY_INSTRUCTIONS,
        user=user,
        payload={"trigger_sentence": trigger_sentence, "dropped_text": dropped_text},
    )


def _require_string(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise SchemaViolation(f"field {key!r} missing or not a string")
    return value


def _require_id_list(payload: dict, key: str) -> list[str]:
    value = payload.get(key)
    if not isinstance(value, list) or any(not isinstance(item, str) for item in value):
        raise SchemaViolation(f"field {key!r} missing or not a list of strings")
    return value


def _validated_ids(raw_ids: list[str], valid: set[str], side: str) -> tuple[str, ...]:
    kept = []
    for cited in raw_ids:
        if cited in valid:
            kept.append(cited)
        else:
            log_event(logger, "judge.unknown_excerpt_id", level=logging.WARNING, excerpt_id=cited[:32], doc_kind=side)
    return tuple(kept)


def parse_response(
    raw: str,
    registration_ids: set[str],
    paper_ids: set[str],
) -> tuple[SourceSummary, SourceSummary, DeviationJudgement]:
    """Strictly parse a provider response against the structured schema.

    Unknown cited excerpt IDs are dropped with a warning; anything else that
    deviates from the schema raises ``SchemaViolation``.
    """
    try:
        payload = json.loads(raw)
    except (json.JSONDecodeError, TypeError) as exc:
        raise SchemaViolation(f"response is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise SchemaViolation("response must be a JSON object")

    registration_summary = _require_string(payload, "registration_summary")
    paper_summary = _require_string(payload, "paper_summary")
    deviation = _require_string(payload, "deviation").strip().lower()
    information = _require_string(payload, "deviation_information")
    if deviation not in VERDICTS:
        raise SchemaViolation(f"unknown verdict {deviation!r}")
    if not information:
        raise SchemaViolation("deviation_information must be non-empty")
    registration_cited = _require_id_list(payload, "registration_cited_ids")
    paper_cited = _require_id_list(payload, "paper_cited_ids")

    return (
        SourceSummary(registration_summary, _validated_ids(registration_cited, registration_ids, "registration")),
        SourceSummary(paper_summary, _validated_ids(paper_cited, paper_ids, "paper")),
        DeviationJudgement(verdict=deviation, deviation_information=information),
    )


def parse_cross_study_response(raw: str) -> list[tuple[str, str]]:
    try:
        payload = json.loads(raw)
    except (json.JSONDecodeError, TypeError) as exc:
        raise SchemaViolation(f"response is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("quotes"), list):
        raise SchemaViolation("response must be an object with a quotes list")
    quotes = []
    for item in payload["quotes"]:
        if not isinstance(item, dict):
            raise SchemaViolation("each quote entry must be an object")
        quote = item.get("quote")
        label = item.get("study_label", "")
        if not isinstance(quote, str) or not isinstance(label, str):
            raise SchemaViolation("quote entries need string quote and study_label")
        quotes.append((quote, label))
    return quotes


def _no_content_analysis(
    dimension: Dimension,
    registration_excerpts: Sequence[ScoredExcerpt],
    paper_excerpts: Sequence[ScoredExcerpt],
) -> DimensionAnalysis:
    def summary(excerpts: Sequence[ScoredExcerpt]) -> SourceSummary:
        if not excerpts:
            return SourceSummary("No relevant content was available from this source.")
        return SourceSummary(
            "Not evaluated: the other source provided no content for this dimension.",
            tuple(e.chunk_id for e in excerpts),
        )

    return DimensionAnalysis(
        dimension=dimension,
        registration_excerpts=tuple(registration_excerpts),
        paper_excerpts=tuple(paper_excerpts),
        registration_summary=summary(registration_excerpts),
        paper_summary=summary(paper_excerpts),
        judgement=DeviationJudgement(verdict="missing", deviation_information="insufficient evidence"),
    )


def _fallback_analysis(
    dimension: Dimension,
    registration_excerpts: Sequence[ScoredExcerpt],
    paper_excerpts: Sequence[ScoredExcerpt],
    reason: str,
) -> DimensionAnalysis:
    return DimensionAnalysis(
        dimension=dimension,
        registration_excerpts=tuple(registration_excerpts),
        paper_excerpts=tuple(paper_excerpts),
        registration_summary=SourceSummary("Summary unavailable: the judgement provider failed."),
        paper_summary=SourceSummary("Summary unavailable: the judgement provider failed."),
        judgement=DeviationJudgement(verdict="missing", deviation_information=reason),
    )


def analyze_dimension(
    dimension: Dimension,
    registration_excerpts: Sequence[ScoredExcerpt],
    paper_excerpts: Sequence[ScoredExcerpt],
    context: ChainContext,
    provider: JudgementProvider,
) -> DimensionAnalysis:
    """Evaluate one dimension; total — always returns a well-formed analysis."""
    if not registration_excerpts or not paper_excerpts:
        return _no_content_analysis(dimension, registration_excerpts, paper_excerpts)

    bundle = build_prompt(dimension, registration_excerpts, paper_excerpts, context)
    registration_ids = {e.chunk_id for e in registration_excerpts}
    paper_ids = {e.chunk_id for e in paper_excerpts}

    attempts = (bundle, bundle.with_corrective_instruction())
    last_error: Exception | None = None
    for attempt_number, attempt_bundle in enumerate(attempts, 1):
        try:
            raw = provider.complete(attempt_bundle)
            reg_summary, paper_summary, judgement = parse_response(raw, registration_ids, paper_ids)
            return DimensionAnalysis(
                dimension=dimension,
                registration_excerpts=tuple(registration_excerpts),
                paper_excerpts=tuple(paper_excerpts),
                registration_summary=reg_summary,
                paper_summary=paper_summary,
                judgement=judgement,
            )
        except SchemaViolation as exc:
            last_error = exc
            log_event(
                logger,
                "judge.schema_violation",
                level=logging.WARNING,
                dimension_label=dimension.label[:64],
                attempt=attempt_number,
            )
        except ProviderUnavailable as exc:
            last_error = exc
            log_event(
                logger,
                "judge.provider_unavailable",
                level=logging.WARNING,
                dimension_label=dimension.label[:64],
                attempt=attempt_number,
            )
            break  # transport retries already happened inside the provider
    kind = "malformed output" if isinstance(last_error, SchemaViolation) else "an unavailable provider"
    return _fallback_analysis(
        dimension,
        registration_excerpts,
        paper_excerpts,
        f"The judgement provider failed for this dimension ({kind}); no deviation assessment was possible.",
    )


# --- providers ---


class MockJudgeProvider:
    """Deterministic rule-based provider for offline runs and tests.

    Compares the numeric tokens mentioned by each side's excerpts: differing
    numbers mean a deviation, an empty side means missing evidence, and
    matching numbers (or none at all) mean no deviation. Summaries list the
    most frequent content words of each side.
    """

    def __init__(self):
        self.bundles: list[PromptBundle] = []

    @staticmethod
    def _numbers(texts: Sequence[str]) -> list[str]:
        values = {token for text in texts for token in tokenize(text) if token.isdigit()}
        return sorted(values, key=lambda v: (len(v), v))

    _STOPWORDS = frozenset(
        """about across after again alone also among been before being both could
        does each either every following from have here into never once only other
        over same should since that their them then there these they this those
        through under until upon were what when where which while will with within
        without would""".split()
    )

    @staticmethod
    def _keywords(texts: Sequence[str], limit: int = 5) -> list[str]:
        counts: Counter[str] = Counter(
            token.lower()
            for text in texts
            for token in tokenize(text)
            if token.isalpha() and len(token) > 3 and token.lower() not in MockJudgeProvider._STOPWORDS
        )
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        return [token for token, _ in ranked[:limit]]

    def _summary(self, excerpts: list[tuple[str, str]]) -> dict:
        texts = [text for _, text in excerpts]
        keywords = self._keywords(texts)
        numbers = self._numbers(texts)
        bits = []
        if keywords:
            bits.append("mentions " + ", ".join(keywords))
        if numbers:
            bits.append("numeric values " + ", ".join(numbers))
        text = ("This source " + " and ".join(bits) + ".") if bits else "This source provided no distinctive content."
        return {"text": text, "ids": [chunk_id for chunk_id, _ in excerpts]}

    def complete(self, bundle: PromptBundle) -> str:
        self.bundles.append(bundle)
        if bundle.kind == CROSS_STUDY_PROMPT:
            return json.dumps({"quotes": []})
        registration = bundle.payload["registration_excerpts"]
        paper = bundle.payload["paper_excerpts"]
        reg_numbers = self._numbers([text for _, text in registration])
        paper_numbers = self._numbers([text for _, text in paper])
        if not registration or not paper:
            verdict, information = "missing", "insufficient evidence"
        elif reg_numbers and paper_numbers and reg_numbers != paper_numbers:
            # A numeric deviation needs conflicting claims from both sides; a
            # side that mentions no numbers makes no numeric claim at all.
            verdict = "yes"
            information = (
                "Numeric values differ between the sources: the registration excerpts mention "
                f"[{', '.join(reg_numbers)}] while the paper excerpts mention "
                f"[{', '.join(paper_numbers)}]."
            )
        else:
            verdict = "no"
            information = "No numeric discrepancies were detected between the sources for this dimension."
        reg_summary = self._summary(registration)
        paper_summary = self._summary(paper)
        return json.dumps(
            {
                "registration_summary": reg_summary["text"],
                "registration_cited_ids": reg_summary["ids"],
                "paper_summary": paper_summary["text"],
                "paper_cited_ids": paper_summary["ids"],
                "deviation": verdict,
                "deviation_information": information,
            }
        )


class OpenAIChatProvider:
    """Client for an OpenAI-compatible POST /v1/chat/completions endpoint."""

    def __init__(
        self,
        base_url: str,
        api_key: str = "",
        model: str = "gpt-5",
        timeout: float = 60.0,
        retries: int = 3,
        sleeper: Callable[[float], None] = time.sleep,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.model = model
        self._retries = retries
        self._sleeper = sleeper
        url = base_url.rstrip("/")
        if not url.endswith("/chat/completions"):
            url = url + "/v1/chat/completions"
        self._url = url
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def complete(self, bundle: PromptBundle) -> str:
        body = {"model": self.model, "messages": bundle.messages(), "temperature": 0}
        last_error: Exception | None = None
        for attempt in range(self._retries + 1):
            try:
                response = self._client.post(self._url, json=body)
                if response.status_code >= 500:
                    raise ProviderUnavailable(f"chat endpoint returned {response.status_code}")
                response.raise_for_status()
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except (httpx.HTTPError, ProviderUnavailable, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if attempt < self._retries:
                    self._sleeper(0.5 * (2**attempt))
        raise ProviderUnavailable(f"judgement provider failed after {self._retries} retries: {last_error}")
