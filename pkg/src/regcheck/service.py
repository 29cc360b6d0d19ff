"""HTTP API: task creation with uploads and settings, polling, report access.

POST /tasks validates the request synchronously (registry identifiers are
resolved here so callers get an immediate 502 when the registry is down),
creates the persistent report, and runs the pipeline on a bounded worker
pool. Reads are side-effect free; raw upload bytes and parsed documents live
only for the duration of the task.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, File, Form, HTTPException, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from . import ingest
from .config import RegcheckConfig, config_from_env
from .dimensions import Dimension, default_dimensions
from .errors import (
    MalformedId,
    RegcheckError,
    RegistryNotFound,
    RegistryUnavailable,
    UnknownReport,
    UnsupportedFormat,
    ValidationError,
)
from .logging_utils import log_event
from .pipeline import PipelineEnv, TaskSources, Upload, make_env, run_pipeline
from .preprocess import StudySelector
from .report import Clock, IdFactory, ReportStore, TaskSettings, export_csv, random_report_id, utc_now_iso
from .retrieval import RetrievalConfig

logger = logging.getLogger(__name__)


def _parse_settings(settings_json: str, config: RegcheckConfig) -> tuple[TaskSettings, Optional[str]]:
    """Validate the settings form field; returns settings and an optional NCT id."""
    try:
        payload = json.loads(settings_json)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"settings is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValidationError("settings must be a JSON object")

    raw_dimensions = payload.get("dimensions")
    if raw_dimensions is None:
        dimensions = tuple(default_dimensions())
    else:
        if not isinstance(raw_dimensions, list):
            raise ValidationError("dimensions must be a list")
        dimensions = tuple(
            Dimension(
                label=str(d.get("label", "")),
                definition=str(d.get("definition", "")),
                builtin=bool(d.get("builtin", False)),
            )
            for d in raw_dimensions
            if isinstance(d, dict)
        )
        if len(dimensions) != len(raw_dimensions):
            raise ValidationError("each dimension must be an object")

    retrieval_payload = payload.get("retrieval", {})
    if not isinstance(retrieval_payload, dict):
        raise ValidationError("retrieval must be an object")
    retrieval = RetrievalConfig(
        k=int(retrieval_payload.get("k", 5)),
        pool_multiplier=int(retrieval_payload.get("pool_multiplier", 3)),
    )

    multi_payload = payload.get("multi_study", {})
    if not isinstance(multi_payload, dict):
        raise ValidationError("multi_study must be an object")
    selector = StudySelector(
        multi_study=bool(multi_payload.get("multi_study", False)),
        target_label=multi_payload.get("target_label"),
    )

    parser = payload.get("parser", ingest.GROBID)
    if parser not in (ingest.GROBID, ingest.PLAINTEXT_FALLBACK):
        raise ValidationError(f"unknown parser {parser!r}")

    nct_id = payload.get("registration_nct_id")
    if nct_id is not None:
        nct_id = ingest.normalize_nct_id(str(nct_id))

    settings = TaskSettings(
        parser=parser,
        model=str(payload.get("model", config.llm_model if config.provider == "live" else "mock-judge")),
        chaining=bool(payload.get("chaining", True)),
        retrieval=retrieval,
        dimensions=dimensions,
        multi_study=selector,
    )
    return settings, nct_id


async def _read_upload(upload: Optional[UploadFile], limit: int) -> Optional[Upload]:
    if upload is None or upload.filename in (None, ""):
        return None
    data = await upload.read()
    if len(data) > limit:
        raise ValidationError(f"upload {upload.filename!r} exceeds the {limit} byte limit")
    return Upload(data=data, format=ingest.format_from_filename(upload.filename), filename=upload.filename)


def create_app(
    config: Optional[RegcheckConfig] = None,
    env: Optional[PipelineEnv] = None,
    id_factory: IdFactory = random_report_id,
    clock: Clock = utc_now_iso,
) -> FastAPI:
    config = config or config_from_env()
    pipeline_env = env or make_env(config)
    store = ReportStore(config.data_dir, id_factory=id_factory, clock=clock)
    executor = ThreadPoolExecutor(max_workers=max(1, config.task_workers), thread_name_prefix="regcheck-task")

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        executor.shutdown(wait=True)

    app = FastAPI(title="regcheck", lifespan=lifespan)
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.post("/tasks")
    async def create_task(
        settings: str = Form(...),
        registration: Optional[UploadFile] = File(None),
        paper: Optional[UploadFile] = File(None),
    ):
        try:
            task_settings, nct_id = _parse_settings(settings, config)
            paper_upload = await _read_upload(paper, config.upload_limit_bytes)
            registration_upload = await _read_upload(registration, config.upload_limit_bytes)
            if paper_upload is None:
                raise ValidationError("a paper upload is required")
            if not paper_upload.data or (registration_upload is not None and not registration_upload.data):
                raise ValidationError("uploads must be non-empty")

            record = None
            if nct_id is not None:
                if registration_upload is not None:
                    raise ValidationError("provide either a registration upload or an NCT id, not both")
                if pipeline_env.registry_client is None:
                    raise RegistryUnavailable("no registry client configured")
                record = ingest.fetch_registration(nct_id, pipeline_env.registry_client)
            elif registration_upload is None:
                raise ValidationError("a registration upload or NCT id is required")

            sources = TaskSources(
                paper=paper_upload,
                registration_upload=registration_upload,
                registration_record=record,
            )
        except (ValidationError, MalformedId, UnsupportedFormat, RegistryNotFound) as exc:
            raise HTTPException(status_code=400, detail=f"{type(exc).__name__}: {exc}") from exc
        except RegistryUnavailable as exc:
            raise HTTPException(status_code=502, detail=f"RegistryUnavailable: {exc}") from exc

        report = store.create_report(task_settings)
        log_event(logger, "service.task_created", report_id=report.report_id, total=report.total)
        executor.submit(run_pipeline, report.report_id, task_settings, sources, store, pipeline_env)
        return {"report_id": report.report_id}

    @app.get("/tasks/{report_id}/status")
    def task_status(report_id: str):
        try:
            report = store.get_report(report_id)
        except UnknownReport as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"status": report.status, "done": report.done, "total": report.total}

    @app.get("/reports/{report_id}.csv")
    def report_csv(report_id: str):
        try:
            report = store.get_report(report_id)
        except UnknownReport as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return Response(
            content=export_csv(report),
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": f'attachment; filename="regcheck-{report_id}.csv"'},
        )

    @app.get("/reports/{report_id}")
    def report_json(report_id: str):
        try:
            body = store.get_report_bytes(report_id)
        except UnknownReport as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return Response(content=body, media_type="application/json")

    return app


def main() -> None:  # pragma: no cover - thin uvicorn launcher
    import uvicorn

    config = config_from_env()
    host, _, port = config.bind_addr.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":  # pragma: no cover
    main()
