"""End-to-end task execution shared by the HTTP service and the CLI.

Stage order: ingest both sources, normalize, chunk, embed, then evaluate each
dimension (retrieve evidence, obtain summaries and a judgement) and append
the analysis to the persistent report as it is produced. Dimension-level
provider failures degrade that dimension to a ``missing`` verdict; only
document-level failures mark the report failed.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import ingest
from .chunker import ChunkingConfig, chunk_document, segment_sentences
from .config import LIVE, MOCK, RegcheckConfig
from .documents import PAPER, REGISTRATION, SectionedDocument
from .embedding import (
    EmbeddingProvider,
    MockEmbeddingProvider,
    OpenAIEmbeddingProvider,
    VectorStore,
)
from .errors import (
    DimensionMismatch,
    EmptyRecord,
    MalformedId,
    ParserServiceUnavailable,
    RegcheckError,
    RegistryNotFound,
    RegistryUnavailable,
    TargetStudyNotFound,
    UnparseableDocument,
    UnsupportedFormat,
    ValidationError,
)
from .ingest import GrobidClient, RegistryClient, RegistryRecord
from .judge import (
    ChainContext,
    DimensionAnalysis,
    JudgementProvider,
    MockJudgeProvider,
    OpenAIChatProvider,
    analyze_dimension,
)
from .logging_utils import log_event
from .preprocess import filter_to_study, resolve_cross_study_references, strip_references
from .report import Report, ReportStore, TaskSettings
from .retrieval import retrieve_for_dimension

logger = logging.getLogger(__name__)

DOCUMENT_FAILURES = (
    UnparseableDocument,
    ParserServiceUnavailable,
    UnsupportedFormat,
    RegistryNotFound,
    RegistryUnavailable,
    MalformedId,
    EmptyRecord,
    TargetStudyNotFound,
    DimensionMismatch,
    ValidationError,
)

ProgressCallback = Callable[[int, int, str], None]


@dataclass(frozen=True)
class Upload:
    data: bytes
    format: str
    filename: Optional[str] = None


@dataclass(frozen=True)
class TaskSources:
    """Exactly one registration variant plus the uploaded paper."""

    paper: Upload
    registration_upload: Optional[Upload] = None
    registration_record: Optional[RegistryRecord] = None
    registration_nct_id: Optional[str] = None

    def __post_init__(self) -> None:
        variants = [
            self.registration_upload is not None,
            self.registration_record is not None,
            self.registration_nct_id is not None,
        ]
        if sum(variants) != 1:
            raise ValidationError("exactly one registration source is required")


@dataclass
class PipelineEnv:
    """Shared handles a task run needs: providers, parsers, tuning."""

    embedder: EmbeddingProvider
    judge_provider: JudgementProvider
    registry_client: Optional[RegistryClient] = None
    grobid_client: Optional[GrobidClient] = None
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    provider_concurrency: int = 2


def make_providers(config: RegcheckConfig) -> tuple[EmbeddingProvider, JudgementProvider]:
    if config.provider == MOCK:
        return MockEmbeddingProvider(), MockJudgeProvider()
    if not config.embeddings_url or not config.llm_url:
        raise ValidationError("live providers need REGCHECK_EMBEDDINGS_URL and REGCHECK_LLM_URL")
    embedder = OpenAIEmbeddingProvider(
        base_url=config.embeddings_url,
        api_key=config.embeddings_key,
        model=config.embeddings_model,
    )
    judge = OpenAIChatProvider(
        base_url=config.llm_url,
        api_key=config.llm_key,
        model=config.llm_model,
    )
    return embedder, judge


def make_env(config: RegcheckConfig) -> PipelineEnv:
    embedder, judge_provider = make_providers(config)
    return PipelineEnv(
        embedder=embedder,
        judge_provider=judge_provider,
        registry_client=RegistryClient(base_url=config.registry_base_url),
        grobid_client=GrobidClient(config.grobid_url) if config.grobid_url else None,
        provider_concurrency=config.provider_concurrency,
    )


def _ingest_registration(sources: TaskSources, env: PipelineEnv) -> SectionedDocument:
    if sources.registration_record is not None:
        return ingest.registry_record_to_document(sources.registration_record)
    if sources.registration_nct_id is not None:
        if env.registry_client is None:
            raise RegistryUnavailable("no registry client configured")
        record = ingest.fetch_registration(sources.registration_nct_id, env.registry_client)
        return ingest.registry_record_to_document(record)
    upload = sources.registration_upload
    assert upload is not None
    return ingest.parse_registration_upload(upload.data, upload.format, upload.filename)


def _ingest_paper(sources: TaskSources, settings: TaskSettings, env: PipelineEnv) -> SectionedDocument:
    upload = sources.paper
    return ingest.parse_paper_upload(
        upload.data,
        upload.format,
        parser_choice=settings.parser,
        grobid_client=env.grobid_client,
        filename=upload.filename,
    )


def _prepare_documents(
    sources: TaskSources, settings: TaskSettings, env: PipelineEnv
) -> tuple[SectionedDocument, SectionedDocument]:
    registration = strip_references(_ingest_registration(sources, env))
    paper = strip_references(_ingest_paper(sources, settings, env))
    if settings.multi_study.multi_study:
        filtered = filter_to_study(paper, settings.multi_study)
        paper = resolve_cross_study_references(filtered, paper, env.judge_provider)
    return registration, paper


def build_vector_store(
    registration: SectionedDocument,
    paper: SectionedDocument,
    env: PipelineEnv,
) -> VectorStore:
    store = VectorStore()
    for doc, kind in ((registration, REGISTRATION), (paper, PAPER)):
        sentences = segment_sentences(doc)
        chunks = chunk_document(sentences, env.chunking, kind)
        log_event(logger, "pipeline.chunked", doc_kind=kind, chunk_count=len(chunks))
        store.add_chunks(chunks, env.embedder)
    return store


def _evaluate_dimensions(
    report_id: str,
    settings: TaskSettings,
    vectors: VectorStore,
    report_store: ReportStore,
    env: PipelineEnv,
    progress: Optional[ProgressCallback],
) -> None:
    total = len(settings.dimensions)

    def evaluate(dimension, context: ChainContext) -> DimensionAnalysis:
        reg_excerpts, paper_excerpts = retrieve_for_dimension(
            dimension, vectors, settings.retrieval, env.embedder
        )
        return analyze_dimension(dimension, reg_excerpts, paper_excerpts, context, env.judge_provider)

    if settings.chaining:
        context = ChainContext(enabled=True)
        for index, dimension in enumerate(settings.dimensions, 1):
            analysis = evaluate(dimension, context)
            context = context.with_result(analysis)
            report_store.append_analysis(report_id, analysis)
            log_event(logger, "pipeline.dimension_done", report_id=report_id,
                      dimension_label=dimension.label[:64], verdict=analysis.judgement.verdict,
                      done=index, total=total)
            if progress:
                progress(index, total, dimension.label)
    else:
        disabled = ChainContext(enabled=False)
        with ThreadPoolExecutor(max_workers=max(1, env.provider_concurrency)) as pool:
            futures = [pool.submit(evaluate, d, disabled) for d in settings.dimensions]
            for index, (dimension, future) in enumerate(zip(settings.dimensions, futures), 1):
                analysis = future.result()
                report_store.append_analysis(report_id, analysis)
                log_event(logger, "pipeline.dimension_done", report_id=report_id,
                          dimension_label=dimension.label[:64], verdict=analysis.judgement.verdict,
                          done=index, total=total)
                if progress:
                    progress(index, total, dimension.label)


def run_pipeline(
    report_id: str,
    settings: TaskSettings,
    sources: TaskSources,
    report_store: ReportStore,
    env: PipelineEnv,
    progress: Optional[ProgressCallback] = None,
) -> Report:
    """Execute the full task against an already-created running report."""
    try:
        registration, paper = _prepare_documents(sources, settings, env)
        vectors = build_vector_store(registration, paper, env)
        _evaluate_dimensions(report_id, settings, vectors, report_store, env, progress)
    except DOCUMENT_FAILURES as exc:
        reason = f"{type(exc).__name__}: {exc}"
        log_event(logger, "pipeline.failed", level=logging.ERROR, report_id=report_id,
                  error_kind=type(exc).__name__)
        return report_store.mark_failed(report_id, reason)
    except RegcheckError as exc:
        log_event(logger, "pipeline.failed", level=logging.ERROR, report_id=report_id,
                  error_kind=type(exc).__name__)
        return report_store.mark_failed(report_id, f"{type(exc).__name__}: {exc}")
    return report_store.get_report(report_id)
