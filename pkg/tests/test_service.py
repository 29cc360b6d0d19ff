import json
import time

import httpx
import pytest
from fastapi.testclient import TestClient

from regcheck.chunker import ChunkingConfig
from regcheck.config import RegcheckConfig
from regcheck.embedding import MockEmbeddingProvider
from regcheck.ingest import RegistryClient
from regcheck.judge import MockJudgeProvider
from regcheck.pipeline import PipelineEnv
from regcheck.service import create_app

from conftest import FIXTURES, fixed_clock, seeded_id_factory


def make_test_app(tmp_path, registry_handler=None, **config_kwargs):
    config = RegcheckConfig(data_dir=tmp_path / "data", provider="mock", **config_kwargs)
    registry_client = None
    if registry_handler is not None:
        registry_client = RegistryClient(
            base_url="http://registry.test",
            retries=1,
            sleeper=lambda _: None,
            transport=httpx.MockTransport(registry_handler),
        )
    env = PipelineEnv(
        embedder=MockEmbeddingProvider(),
        judge_provider=MockJudgeProvider(),
        registry_client=registry_client,
        chunking=ChunkingConfig(),
    )
    return create_app(config, env=env, id_factory=seeded_id_factory(), clock=fixed_clock)


def post_fixture_task(client, settings=None):
    files = {
        "registration": ("registration.txt", (FIXTURES / "golden_registration.txt").read_bytes(), "text/plain"),
        "paper": ("paper.txt", (FIXTURES / "golden_paper.txt").read_bytes(), "text/plain"),
    }
    data = {"settings": json.dumps(settings if settings is not None else {"parser": "plaintext_fallback"})}
    return client.post("/tasks", data=data, files=files)


def wait_for_completion(client, report_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    last = None
    while time.monotonic() < deadline:
        response = client.get(f"/tasks/{report_id}/status")
        assert response.status_code == 200
        last = response.json()
        if last["status"] in ("complete", "failed"):
            return last
        time.sleep(0.05)
    raise AssertionError(f"task did not finish: {last}")


class TestTaskLifecycle:
    def test_full_lifecycle(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            response = post_fixture_task(client)
            assert response.status_code == 200
            report_id = response.json()["report_id"]
            assert len(report_id) == 10

            status = wait_for_completion(client, report_id)
            assert status == {"status": "complete", "done": 6, "total": 6}

            report = client.get(f"/reports/{report_id}")
            assert report.status_code == 200
            payload = report.json()
            assert len(payload["analyses"]) == 6

            csv_response = client.get(f"/reports/{report_id}.csv")
            assert csv_response.status_code == 200
            assert csv_response.headers["content-type"].startswith("text/csv")
            assert csv_response.content.startswith(b"dimension_label,")

    def test_status_monotonic(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            report_id = post_fixture_task(client).json()["report_id"]
            seen = []
            while True:
                status = client.get(f"/tasks/{report_id}/status").json()
                seen.append(status["done"])
                if status["status"] in ("complete", "failed"):
                    break
                time.sleep(0.02)
            assert seen == sorted(seen)
            assert status["status"] == "complete"

    def test_unknown_ids_404(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            assert client.get("/tasks/AAAAAAAAAA/status").status_code == 404
            assert client.get("/reports/AAAAAAAAAA").status_code == 404
            assert client.get("/reports/AAAAAAAAAA.csv").status_code == 404

    def test_persistence_survives_restart(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            report_id = post_fixture_task(client).json()["report_id"]
            wait_for_completion(client, report_id)
            original = client.get(f"/reports/{report_id}").content

        restarted = make_test_app(tmp_path)  # same data dir, fresh process state
        with TestClient(restarted) as client:
            assert client.get(f"/reports/{report_id}").content == original
            assert client.get(f"/tasks/{report_id}/status").json()["status"] == "complete"


class TestValidation:
    def test_zero_dimensions_400(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            response = post_fixture_task(client, settings={"dimensions": []})
            assert response.status_code == 400

    def test_malformed_nct_400(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            files = {"paper": ("paper.txt", b"Intro\n\nBody text.", "text/plain")}
            response = client.post(
                "/tasks",
                data={"settings": json.dumps({"registration_nct_id": "NCT123"})},
                files=files,
            )
            assert response.status_code == 400
            assert "MalformedId" in response.json()["detail"]

    def test_missing_paper_400(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            files = {"registration": ("reg.txt", b"Some registration.", "text/plain")}
            response = client.post("/tasks", data={"settings": "{}"}, files=files)
            assert response.status_code == 400

    def test_missing_registration_400(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            files = {"paper": ("paper.txt", b"Intro\n\nBody.", "text/plain")}
            response = client.post("/tasks", data={"settings": "{}"}, files=files)
            assert response.status_code == 400

    def test_both_registration_variants_400(self, tmp_path):
        def handler(request):
            return httpx.Response(200, json={"protocolSection": {"identificationModule": {"briefTitle": "T"}}})

        app = make_test_app(tmp_path, registry_handler=handler)
        with TestClient(app) as client:
            files = {
                "registration": ("reg.txt", b"Some registration.", "text/plain"),
                "paper": ("paper.txt", b"Intro\n\nBody.", "text/plain"),
            }
            response = client.post(
                "/tasks",
                data={"settings": json.dumps({"registration_nct_id": "NCT01234567"})},
                files=files,
            )
            assert response.status_code == 400

    def test_invalid_settings_json_400(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            files = {"paper": ("paper.txt", b"Intro\n\nBody.", "text/plain")}
            response = client.post("/tasks", data={"settings": "{not json"}, files=files)
            assert response.status_code == 400

    def test_oversized_upload_400(self, tmp_path):
        app = make_test_app(tmp_path, upload_limit_bytes=64)
        with TestClient(app) as client:
            files = {
                "registration": ("reg.txt", b"r" * 100, "text/plain"),
                "paper": ("paper.txt", b"p" * 100, "text/plain"),
            }
            response = client.post("/tasks", data={"settings": "{}"}, files=files)
            assert response.status_code == 400


class TestRegistrySourcedTasks:
    def test_registry_unavailable_502(self, tmp_path):
        app = make_test_app(tmp_path, registry_handler=lambda r: httpx.Response(500))
        with TestClient(app) as client:
            files = {"paper": ("paper.txt", b"Intro\n\nBody text here.", "text/plain")}
            response = client.post(
                "/tasks",
                data={"settings": json.dumps({"registration_nct_id": "NCT01234567"})},
                files=files,
            )
            assert response.status_code == 502

    def test_registry_not_found_400(self, tmp_path):
        app = make_test_app(tmp_path, registry_handler=lambda r: httpx.Response(404))
        with TestClient(app) as client:
            files = {"paper": ("paper.txt", b"Intro\n\nBody text here.", "text/plain")}
            response = client.post(
                "/tasks",
                data={"settings": json.dumps({"registration_nct_id": "NCT01234567"})},
                files=files,
            )
            assert response.status_code == 400

    def test_registry_sourced_task_completes(self, tmp_path, fixtures_dir):
        payload = json.loads((fixtures_dir / "registry_study.json").read_text("utf-8"))
        app = make_test_app(tmp_path, registry_handler=lambda r: httpx.Response(200, json=payload))
        with TestClient(app) as client:
            files = {"paper": ("paper.txt", (FIXTURES / "golden_paper.txt").read_bytes(), "text/plain")}
            response = client.post(
                "/tasks",
                data={"settings": json.dumps({"registration_nct_id": "nct01234567"})},
                files=files,
            )
            assert response.status_code == 200
            report_id = response.json()["report_id"]
            status = wait_for_completion(client, report_id)
            assert status["status"] == "complete"

    def test_unparseable_paper_marks_report_failed(self, tmp_path):
        app = make_test_app(tmp_path)
        with TestClient(app) as client:
            files = {
                "registration": ("reg.txt", b"A registration block.", "text/plain"),
                "paper": ("scan.pdf", b"%PDF-1.4\n%%EOF\n", "application/pdf"),
            }
            response = client.post(
                "/tasks",
                data={"settings": json.dumps({"parser": "plaintext_fallback"})},
                files=files,
            )
            assert response.status_code == 200
            report_id = response.json()["report_id"]
            status = wait_for_completion(client, report_id)
            assert status["status"] == "failed"
            report = client.get(f"/reports/{report_id}").json()
            assert "UnparseableDocument" in report["failure_reason"]
