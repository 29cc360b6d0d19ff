"""Command-line front end: run one comparison locally, without the HTTP layer.

Exit codes: 0 when the report completes, 2 when the task fails, 1 on usage
errors. Progress lines on stdout are machine-parseable: ``PROGRESS i/M <label>``.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from . import ingest
from .config import RegcheckConfig, config_from_env
from .dimensions import default_dimensions, load_dimensions
from .errors import RegcheckError, ValidationError
from .pipeline import TaskSources, Upload, make_env, run_pipeline
from .preprocess import StudySelector
from .report import (
    COMPLETE,
    Clock,
    IdFactory,
    ReportStore,
    TaskSettings,
    export_csv,
    random_report_id,
    report_to_json_bytes,
    utc_now_iso,
)
from .retrieval import RetrievalConfig


class _UsageExit1Parser(argparse.ArgumentParser):
    """Exit with status 1 on usage errors (argparse defaults to 2)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _UsageExit1Parser(prog="regcheck", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="compare a registration against a paper")
    compare.add_argument("--registration", required=True,
                         help="path to the registration file, or an NCT identifier")
    compare.add_argument("--paper", required=True, help="path to the paper file")
    compare.add_argument("--dimensions", help="dimension file (same format as the defaults file)")
    compare.add_argument("--no-chaining", action="store_true",
                         help="evaluate dimensions independently instead of chaining outputs")
    compare.add_argument("--k", type=int, default=5, help="excerpts kept per source (default 5)")
    compare.add_argument("--parser", choices=["grobid", "plaintext"], default="grobid",
                         help="paper parser engine")
    compare.add_argument("--provider", choices=["mock", "live"], default=None,
                         help="embedding/judgement providers (default from REGCHECK_PROVIDER)")
    compare.add_argument("--out", default=".", help="directory for report.json and report.csv")
    compare.add_argument("--multi-study", metavar="LABEL", default=None,
                         help="reduce a multi-study paper to this study (e.g. 'Study 2')")
    return parser


def _registration_source(raw: str) -> tuple[Optional[Upload], Optional[str]]:
    if ingest.looks_like_nct_id(raw):
        return None, ingest.normalize_nct_id(raw)
    path = Path(raw)
    data = path.read_bytes()
    return Upload(data=data, format=ingest.format_from_filename(path.name), filename=path.name), None


def run_compare(
    args: argparse.Namespace,
    config: Optional[RegcheckConfig] = None,
    id_factory: IdFactory = random_report_id,
    clock: Clock = utc_now_iso,
    out_stream=None,
) -> int:
    out = out_stream or sys.stdout
    config = config or config_from_env()
    if args.provider:
        config.provider = args.provider

    try:
        retrieval = RetrievalConfig(k=args.k)
        dims = load_dimensions(args.dimensions) if args.dimensions else default_dimensions()
        selector = StudySelector(multi_study=bool(args.multi_study), target_label=args.multi_study)
        parser_choice = ingest.GROBID if args.parser == "grobid" else ingest.PLAINTEXT_FALLBACK
        settings = TaskSettings(
            parser=parser_choice,
            model=config.llm_model if config.provider == "live" else "mock-judge",
            chaining=not args.no_chaining,
            retrieval=retrieval,
            dimensions=tuple(dims),
            multi_study=selector,
        )
        registration_upload, nct_id = _registration_source(args.registration)
        paper_path = Path(args.paper)
        paper = Upload(
            data=paper_path.read_bytes(),
            format=ingest.format_from_filename(paper_path.name),
            filename=paper_path.name,
        )
        sources = TaskSources(
            paper=paper,
            registration_upload=registration_upload,
            registration_nct_id=nct_id,
        )
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    except (OSError, ValidationError, RegcheckError) as exc:
        print(f"regcheck: error: {exc}", file=sys.stderr)
        return 1

    env = make_env(config)
    with tempfile.TemporaryDirectory(prefix="regcheck-store-") as store_dir:
        store = ReportStore(store_dir, id_factory=id_factory, clock=clock)
        report = store.create_report(settings)

        def progress(done: int, total: int, label: str) -> None:
            print(f"PROGRESS {done}/{total} {label}", file=out, flush=True)

        final = run_pipeline(report.report_id, settings, sources, store, env, progress)
        (out_dir / "report.json").write_bytes(report_to_json_bytes(final))
        (out_dir / "report.csv").write_bytes(export_csv(final))

    if final.status == COMPLETE:
        print(f"evaluated {final.done} of {final.total} dimensions; report {final.report_id} complete", file=out)
        return 0
    print(f"task failed: {final.failure_reason}", file=sys.stderr)
    return 2


def main(argv: Optional[Sequence[str]] = None, **test_overrides) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare":
        return run_compare(args, **test_overrides)
    parser.error(f"unknown command {args.command!r}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
