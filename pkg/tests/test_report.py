import json
import re

import pytest

from regcheck.dimensions import Dimension, default_dimensions
from regcheck.errors import DuplicateDimension, ReportNotRunning, UnknownReport, ValidationError
from regcheck.judge import DeviationJudgement, DimensionAnalysis, SourceSummary
from regcheck.preprocess import StudySelector
from regcheck.report import (
    COMPLETE,
    RUNNING,
    ReportStore,
    TaskSettings,
    export_csv,
    random_report_id,
    report_from_dict,
    report_to_dict,
    report_to_json_bytes,
    rows_to_csv,
)
from regcheck.retrieval import RetrievalConfig, ScoredExcerpt

from conftest import fixed_clock, parse_rfc4180, seeded_id_factory


def settings_with(dimensions=None) -> TaskSettings:
    if dimensions is None:
        dimensions = default_dimensions()
    return TaskSettings(
        parser="plaintext_fallback",
        model="mock-judge",
        chaining=True,
        retrieval=RetrievalConfig(),
        dimensions=tuple(dimensions),
        multi_study=StudySelector(),
    )


def analysis_for(label: str, reg_text='Quote with "quotes", commas, and\nnewlines.') -> DimensionAnalysis:
    dimension = next((d for d in default_dimensions() if d.label == label), None) or Dimension(
        label=label, definition="def"
    )
    return DimensionAnalysis(
        dimension=dimension,
        registration_excerpts=(
            ScoredExcerpt(chunk_id="R1", text=reg_text, score=0.91, first_pass_score=0.88),
            ScoredExcerpt(chunk_id="R2", text="Second excerpt ||| with the join marker.", score=0.5, first_pass_score=0.5),
        ),
        paper_excerpts=(ScoredExcerpt(chunk_id="P1", text="Paper quote.", score=0.7, first_pass_score=0.7),),
        registration_summary=SourceSummary("Registration summary.", ("R1",)),
        paper_summary=SourceSummary("Paper summary.", ("P1",)),
        judgement=DeviationJudgement(verdict="no", deviation_information="They match."),
    )


class TestStoreLifecycle:
    def test_create_initial_state(self, tmp_path):
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with())
        assert report.status == RUNNING
        assert (report.done, report.total) == (0, 6)

    def test_distinct_ids(self, tmp_path):
        store = ReportStore(tmp_path)
        a = store.create_report(settings_with())
        b = store.create_report(settings_with())
        assert a.report_id != b.report_id

    def test_id_format_bulk(self):
        pattern = re.compile(r"^[0-9A-Za-z]{10}$")
        for _ in range(10_000):
            assert pattern.match(random_report_id())

    def test_created_report_immediately_readable(self, tmp_path):
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with())
        assert store.get_report(report.report_id).status == RUNNING

    def test_unknown_report(self, tmp_path):
        store = ReportStore(tmp_path)
        with pytest.raises(UnknownReport):
            store.get_report("zzzzzzzzzz")

    def test_append_flow_and_completion(self, tmp_path):
        dims = default_dimensions()[:3]
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with(dims))
        first = store.append_analysis(report.report_id, analysis_for(dims[0].label))
        assert (first.done, first.total, first.status) == (1, 3, RUNNING)
        store.append_analysis(report.report_id, analysis_for(dims[1].label))
        final = store.append_analysis(report.report_id, analysis_for(dims[2].label))
        assert (final.done, final.total, final.status) == (3, 3, COMPLETE)

    def test_duplicate_dimension_rejected(self, tmp_path):
        dims = default_dimensions()[:2]
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with(dims))
        store.append_analysis(report.report_id, analysis_for(dims[0].label))
        with pytest.raises(DuplicateDimension):
            store.append_analysis(report.report_id, analysis_for(dims[0].label))

    def test_append_to_finished_report_rejected(self, tmp_path):
        dims = default_dimensions()[:1]
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with(dims))
        store.append_analysis(report.report_id, analysis_for(dims[0].label))
        with pytest.raises(ReportNotRunning):
            store.append_analysis(report.report_id, analysis_for(dims[0].label))

    def test_foreign_dimension_rejected(self, tmp_path):
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with(default_dimensions()[:2]))
        with pytest.raises(ValidationError):
            store.append_analysis(report.report_id, analysis_for("unrelated dimension"))

    def test_mark_failed(self, tmp_path):
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with())
        failed = store.mark_failed(report.report_id, "UnparseableDocument: empty upload")
        assert failed.status == "failed"
        assert "UnparseableDocument" in failed.failure_reason

    def test_persistence_across_store_instances(self, tmp_path):
        dims = default_dimensions()[:1]
        first_store = ReportStore(tmp_path, id_factory=seeded_id_factory(), clock=fixed_clock)
        report = first_store.create_report(settings_with(dims))
        first_store.append_analysis(report.report_id, analysis_for(dims[0].label))

        second_store = ReportStore(tmp_path)  # simulated restart
        loaded = second_store.get_report(report.report_id)
        assert loaded.status == COMPLETE
        assert loaded.analyses[0].dimension.label == dims[0].label
        assert second_store.get_report_bytes(report.report_id) == report_to_json_bytes(loaded)

    def test_settings_require_dimension(self):
        with pytest.raises(ValidationError):
            settings_with([])


class TestSerialization:
    def test_round_trip_identity(self, tmp_path):
        dims = default_dimensions()[:2]
        store = ReportStore(tmp_path, id_factory=seeded_id_factory(), clock=fixed_clock)
        report = store.create_report(settings_with(dims))
        report = store.append_analysis(report.report_id, analysis_for(dims[0].label))
        payload = report_to_dict(report)
        assert report_from_dict(json.loads(json.dumps(payload))) == report

    def test_canonical_bytes_stable(self, tmp_path):
        dims = default_dimensions()[:1]
        store = ReportStore(tmp_path, id_factory=seeded_id_factory(), clock=fixed_clock)
        report = store.create_report(settings_with(dims))
        assert report_to_json_bytes(report) == report_to_json_bytes(report)
        assert report_to_json_bytes(report).endswith(b"\n")


class TestCsvExport:
    def test_empty_report_header_only(self, tmp_path):
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with())
        data = export_csv(report)
        rows = parse_rfc4180(data)
        assert len(rows) == 1
        assert rows[0][0] == "dimension_label"
        assert rows[0][-1] == "deviation_information"

    def test_quote_escaping(self, tmp_path):
        dims = default_dimensions()[:1]
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with(dims))
        report = store.append_analysis(report.report_id, analysis_for(dims[0].label))
        data = export_csv(report)
        assert b'""quotes""' in data  # RFC 4180 doubled quotes
        rows = parse_rfc4180(data)
        assert rows[1][3] == 'Quote with "quotes", commas, and\nnewlines. ||| Second excerpt ||| with the join marker.'

    def test_round_trip_bytes_identical(self, tmp_path):
        dims = default_dimensions()[:2]
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with(dims))
        report = store.append_analysis(report.report_id, analysis_for(dims[0].label))
        report = store.append_analysis(report.report_id, analysis_for(dims[1].label))
        exported = export_csv(report)
        rows = parse_rfc4180(exported)
        assert rows_to_csv(rows) == exported

    def test_partial_export_contains_only_completed_rows(self, tmp_path):
        dims = default_dimensions()[:3]
        store = ReportStore(tmp_path)
        report = store.create_report(settings_with(dims))
        report = store.append_analysis(report.report_id, analysis_for(dims[0].label))
        rows = parse_rfc4180(export_csv(report))
        assert len(rows) == 2  # header plus the one completed dimension
