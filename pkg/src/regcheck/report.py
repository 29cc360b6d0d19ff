"""Persistent, shareable comparison reports and their CSV export.

Each report is one JSON document in the data directory, written atomically on
every change, so a report URL is live from task creation and survives process
restarts. Persisted content is limited to the report schema: settings,
retrieved excerpt texts, provider summaries, and judgements — never the
source documents themselves.
"""

from __future__ import annotations

import csv
import io
import json
import secrets
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from .dimensions import Dimension, ensure_unique_labels
from .errors import (
    DuplicateDimension,
    ReportNotRunning,
    StorageUnavailable,
    UnknownReport,
    ValidationError,
)
from .judge import DeviationJudgement, DimensionAnalysis, SourceSummary
from .preprocess import StudySelector
from .retrieval import RetrievalConfig, ScoredExcerpt

SCHEMA_VERSION = 1

ID_ALPHABET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
ID_LENGTH = 10

RUNNING = "running"
COMPLETE = "complete"
FAILED = "failed"

CSV_HEADER = [
    "dimension_label",
    "dimension_definition",
    "registration_excerpt_ids",
    "registration_quotes",
    "registration_scores",
    "paper_excerpt_ids",
    "paper_quotes",
    "paper_scores",
    "registration_summary",
    "paper_summary",
    "deviation",
    "deviation_information",
]

CELL_JOIN = " ||| "

IdFactory = Callable[[], str]
Clock = Callable[[], str]


def random_report_id() -> str:
    return "".join(secrets.choice(ID_ALPHABET) for _ in range(ID_LENGTH))


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class TaskSettings:
    parser: str
    model: str
    chaining: bool
    retrieval: RetrievalConfig
    dimensions: tuple[Dimension, ...]
    multi_study: StudySelector

    def __post_init__(self) -> None:
        if not self.dimensions:
            raise ValidationError("at least one dimension is required")
        ensure_unique_labels(self.dimensions)


@dataclass(frozen=True)
class Report:
    report_id: str
    created_at: str
    settings: TaskSettings
    analyses: tuple[DimensionAnalysis, ...] = ()
    status: str = RUNNING
    failure_reason: Optional[str] = None

    @property
    def done(self) -> int:
        return len(self.analyses)

    @property
    def total(self) -> int:
        return len(self.settings.dimensions)


# --- canonical serialization ---


def _excerpt_to_dict(excerpt: ScoredExcerpt) -> dict:
    return {
        "chunk_id": excerpt.chunk_id,
        "text": excerpt.text,
        "score": excerpt.score,
        "first_pass_score": excerpt.first_pass_score,
        "oversized": excerpt.oversized,
    }


def _analysis_to_dict(analysis: DimensionAnalysis) -> dict:
    return {
        "dimension": {
            "label": analysis.dimension.label,
            "definition": analysis.dimension.definition,
            "builtin": analysis.dimension.builtin,
        },
        "registration_excerpts": [_excerpt_to_dict(e) for e in analysis.registration_excerpts],
        "paper_excerpts": [_excerpt_to_dict(e) for e in analysis.paper_excerpts],
        "registration_summary": {
            "text": analysis.registration_summary.text,
            "cited_excerpt_ids": list(analysis.registration_summary.cited_excerpt_ids),
        },
        "paper_summary": {
            "text": analysis.paper_summary.text,
            "cited_excerpt_ids": list(analysis.paper_summary.cited_excerpt_ids),
        },
        "judgement": {
            "verdict": analysis.judgement.verdict,
            "deviation_information": analysis.judgement.deviation_information,
        },
    }


def report_to_dict(report: Report) -> dict:
    settings = report.settings
    return {
        "schema_version": SCHEMA_VERSION,
        "report_id": report.report_id,
        "created_at": report.created_at,
        "status": report.status,
        "progress": {"done": report.done, "total": report.total},
        "failure_reason": report.failure_reason,
        "settings": {
            "parser": settings.parser,
            "model": settings.model,
            "chaining": settings.chaining,
            "retrieval": {
                "k": settings.retrieval.k,
                "pool_multiplier": settings.retrieval.pool_multiplier,
            },
            "dimensions": [
                {"label": d.label, "definition": d.definition, "builtin": d.builtin}
                for d in settings.dimensions
            ],
            "multi_study": {
                "multi_study": settings.multi_study.multi_study,
                "target_label": settings.multi_study.target_label,
            },
        },
        "analyses": [_analysis_to_dict(a) for a in report.analyses],
    }


def report_to_json_bytes(report: Report) -> bytes:
    """The canonical byte representation served over HTTP and written to disk."""
    return (json.dumps(report_to_dict(report), ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _excerpt_from_dict(payload: dict) -> ScoredExcerpt:
    return ScoredExcerpt(
        chunk_id=payload["chunk_id"],
        text=payload["text"],
        score=payload["score"],
        first_pass_score=payload["first_pass_score"],
        oversized=payload.get("oversized", False),
    )


def _analysis_from_dict(payload: dict) -> DimensionAnalysis:
    dim = payload["dimension"]
    return DimensionAnalysis(
        dimension=Dimension(label=dim["label"], definition=dim["definition"], builtin=dim["builtin"]),
        registration_excerpts=tuple(_excerpt_from_dict(e) for e in payload["registration_excerpts"]),
        paper_excerpts=tuple(_excerpt_from_dict(e) for e in payload["paper_excerpts"]),
        registration_summary=SourceSummary(
            payload["registration_summary"]["text"],
            tuple(payload["registration_summary"]["cited_excerpt_ids"]),
        ),
        paper_summary=SourceSummary(
            payload["paper_summary"]["text"],
            tuple(payload["paper_summary"]["cited_excerpt_ids"]),
        ),
        judgement=DeviationJudgement(
            verdict=payload["judgement"]["verdict"],
            deviation_information=payload["judgement"]["deviation_information"],
        ),
    )


def report_from_dict(payload: dict) -> Report:
    settings_payload = payload["settings"]
    settings = TaskSettings(
        parser=settings_payload["parser"],
        model=settings_payload["model"],
        chaining=settings_payload["chaining"],
        retrieval=RetrievalConfig(
            k=settings_payload["retrieval"]["k"],
            pool_multiplier=settings_payload["retrieval"]["pool_multiplier"],
        ),
        dimensions=tuple(
            Dimension(label=d["label"], definition=d["definition"], builtin=d["builtin"])
            for d in settings_payload["dimensions"]
        ),
        multi_study=StudySelector(
            multi_study=settings_payload["multi_study"]["multi_study"],
            target_label=settings_payload["multi_study"]["target_label"],
        ),
    )
    return Report(
        report_id=payload["report_id"],
        created_at=payload["created_at"],
        settings=settings,
        analyses=tuple(_analysis_from_dict(a) for a in payload["analyses"]),
        status=payload["status"],
        failure_reason=payload.get("failure_reason"),
    )


# --- CSV export ---


def _format_score(score: float) -> str:
    return f"{score:.6f}"


def export_csv(report: Report) -> bytes:
    """RFC 4180 CSV of the completed rows; multi-value cells joined with |||."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(CSV_HEADER)
    for analysis in report.analyses:
        reg, paper = analysis.registration_excerpts, analysis.paper_excerpts
        writer.writerow(
            [
                analysis.dimension.label,
                analysis.dimension.definition,
                CELL_JOIN.join(e.chunk_id for e in reg),
                CELL_JOIN.join(e.text for e in reg),
                CELL_JOIN.join(_format_score(e.score) for e in reg),
                CELL_JOIN.join(e.chunk_id for e in paper),
                CELL_JOIN.join(e.text for e in paper),
                CELL_JOIN.join(_format_score(e.score) for e in paper),
                analysis.registration_summary.text,
                analysis.paper_summary.text,
                analysis.judgement.verdict,
                analysis.judgement.deviation_information,
            ]
        )
    return buffer.getvalue().encode("utf-8")


def rows_to_csv(rows: list[list[str]]) -> bytes:
    """Re-serialize already-parsed rows with the canonical writer settings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


# --- store ---


class ReportStore:
    """One JSON document per report under a data directory.

    Writes are atomic (write-then-rename) and serialized per report; reads
    always come from disk so restarts and concurrent pollers see a consistent
    document.
    """

    def __init__(
        self,
        data_dir: str | Path,
        id_factory: IdFactory = random_report_id,
        clock: Clock = utc_now_iso,
    ):
        self._dir = Path(data_dir)
        try:
            self._dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageUnavailable(f"cannot create data directory {self._dir}: {exc}") from exc
        self._id_factory = id_factory
        self._clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, report_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(report_id, threading.Lock())

    def _path(self, report_id: str) -> Path:
        if not report_id or any(ch not in ID_ALPHABET for ch in report_id):
            raise UnknownReport(f"no report {report_id!r}")
        return self._dir / f"{report_id}.json"

    def _write(self, report: Report) -> None:
        path = self._path(report.report_id)
        temp = path.with_suffix(".json.tmp")
        try:
            temp.write_bytes(report_to_json_bytes(report))
            temp.replace(path)
        except OSError as exc:
            raise StorageUnavailable(f"cannot persist report {report.report_id}: {exc}") from exc

    def create_report(self, settings: TaskSettings) -> Report:
        for _ in range(64):
            report_id = self._id_factory()
            if len(report_id) == ID_LENGTH and not self._path(report_id).exists():
                break
        else:
            raise StorageUnavailable("could not allocate a fresh report id")
        report = Report(report_id=report_id, created_at=self._clock(), settings=settings)
        with self._lock_for(report_id):
            self._write(report)
        return report

    def get_report(self, report_id: str) -> Report:
        path = self._path(report_id)
        try:
            payload = json.loads(path.read_text("utf-8"))
        except FileNotFoundError:
            raise UnknownReport(f"no report {report_id!r}") from None
        except OSError as exc:
            raise StorageUnavailable(f"cannot read report {report_id}: {exc}") from exc
        return report_from_dict(payload)

    def get_report_bytes(self, report_id: str) -> bytes:
        path = self._path(report_id)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise UnknownReport(f"no report {report_id!r}") from None
        except OSError as exc:
            raise StorageUnavailable(f"cannot read report {report_id}: {exc}") from exc

    def append_analysis(self, report_id: str, analysis: DimensionAnalysis) -> Report:
        with self._lock_for(report_id):
            report = self.get_report(report_id)
            if report.status != RUNNING:
                raise ReportNotRunning(f"report {report_id} is {report.status}")
            labels = {d.label.strip().lower() for d in report.settings.dimensions}
            label = analysis.dimension.label.strip().lower()
            if label not in labels:
                raise ValidationError(f"dimension {analysis.dimension.label!r} is not part of this task")
            if any(a.dimension.label.strip().lower() == label for a in report.analyses):
                raise DuplicateDimension(f"dimension {analysis.dimension.label!r} already appended")
            updated = replace(report, analyses=report.analyses + (analysis,))
            if updated.done == updated.total:
                updated = replace(updated, status=COMPLETE)
            self._write(updated)
            return updated

    def mark_failed(self, report_id: str, reason: str) -> Report:
        with self._lock_for(report_id):
            report = self.get_report(report_id)
            updated = replace(report, status=FAILED, failure_reason=reason)
            self._write(updated)
            return updated
