from __future__ import annotations

import threading

import pytest
import requests

from crashviz.backends import mock_config
from crashviz.evaluation import METRIC_ORDER
from crashviz.pipeline import run_batch
from crashviz.server import make_server
from crashviz.store import CaseStore

from conftest import make_record


@pytest.fixture()
def seeded_store(tmp_path, template) -> CaseStore:
    store = CaseStore(tmp_path / "store")
    records = [
        make_record(case_id="case-001"),
        make_record(case_id="case-002", v1=("North", "West", 3), collision="Sideswipe"),
    ]
    run_batch(records, template, [mock_config()], store, run_id="seed")
    return store


@pytest.fixture()
def api(seeded_store):
    server = make_server(seeded_store, "127.0.0.1:0")
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}"
    server.shutdown()
    server.server_close()


def _scores_body(model="mock-reference", rater="alice", flip=None, notes=None):
    scores = {m.column: 1 for m in METRIC_ORDER}
    if flip:
        scores[flip] = 0
    body = {"model_id": model, "rater_id": rater, "scores": scores}
    if notes:
        body["notes"] = notes
    return body


class TestApi:
    def test_healthz(self, api):
        assert requests.get(f"{api}/healthz").json() == {"status": "ok"}

    def test_cases_listing(self, api):
        cases = requests.get(f"{api}/api/cases").json()
        assert [c["case_id"] for c in cases] == ["case-001", "case-002"]
        assert cases[0]["models"] == ["mock-reference"]
        assert cases[1]["collision_type"] == "Sideswipe"

    def test_case_detail(self, api):
        detail = requests.get(f"{api}/api/cases/case-001").json()
        assert detail["record"]["case_id"] == "case-001"
        assert "truth.svg" in detail["artifacts"]
        assert "gen/mock-reference.svg" in detail["artifacts"]
        assert detail["prompt_text"].startswith("You are provided with a traffic crash report")

    def test_case_not_found(self, api):
        response = requests.get(f"{api}/api/cases/missing")
        assert response.status_code == 404

    def test_artifact_fetch_with_content_type(self, api):
        response = requests.get(f"{api}/api/cases/case-001/artifacts/truth.svg")
        assert response.status_code == 200
        assert response.headers["Content-Type"] == "image/svg+xml"
        assert response.content.startswith(b"<?xml")

    def test_artifact_not_found(self, api):
        response = requests.get(f"{api}/api/cases/case-001/artifacts/gen/none.svg")
        assert response.status_code == 404

    def test_metrics_endpoint_ships_rubric_text(self, api):
        metrics = requests.get(f"{api}/api/metrics").json()
        assert len(metrics) == 10
        assert metrics[0]["id"] == "m1"
        assert metrics[3]["description"].startswith("The crash is depicted in the correct quadrant")

    def test_post_scores_appends_sheet(self, api):
        response = requests.post(
            f"{api}/api/cases/case-001/scores", json=_scores_body()
        )
        assert response.status_code == 201
        detail = requests.get(f"{api}/api/cases/case-001").json()
        raters = [s["rater_id"] for s in detail["sheets"]]
        assert "alice" in raters

    def test_post_scores_rejects_non_binary(self, api):
        body = _scores_body()
        body["scores"]["m4"] = 2
        response = requests.post(f"{api}/api/cases/case-001/scores", json=body)
        assert response.status_code == 400

    def test_post_scores_requires_all_ten(self, api):
        body = _scores_body()
        del body["scores"]["m10"]
        response = requests.post(f"{api}/api/cases/case-001/scores", json=body)
        assert response.status_code == 400

    def test_report_reflects_posted_scores(self, api):
        requests.post(f"{api}/api/cases/case-001/scores", json=_scores_body(flip="m5"))
        report = requests.get(f"{api}/api/report?format=json").json()
        entry = next(m for m in report["models"] if m["model_id"] == "mock-reference")
        assert entry["per_metric"]["m5"]["mean"] == 0.0
        assert entry["per_metric"]["m1"]["mean"] == 1.0

    def test_report_formats(self, api):
        requests.post(f"{api}/api/cases/case-001/scores", json=_scores_body())
        markdown = requests.get(f"{api}/api/report?format=markdown").text
        assert markdown.startswith("| Metric |")
        csv_text = requests.get(f"{api}/api/report?format=csv").text
        assert csv_text.startswith("metric,model,mean,std,n")

    def test_empty_report(self, api):
        report = requests.get(f"{api}/api/report?format=json").json()
        assert report["models"] == []

    def test_consensus_flow(self, api):
        requests.post(f"{api}/api/cases/case-001/scores", json=_scores_body(rater="alice"))
        requests.post(
            f"{api}/api/cases/case-001/scores", json=_scores_body(rater="bob", flip="m7")
        )
        response = requests.post(
            f"{api}/api/cases/case-001/consensus",
            json={
                "model_id": "mock-reference",
                "rater_a": "alice",
                "rater_b": "bob",
                "resolutions": {"m7": {"value": 1, "note": "zone touches marker"}},
            },
        )
        assert response.status_code == 201
        body = response.json()
        assert body["conflicts"] == ["m7"]
        report = requests.get(f"{api}/api/report?format=json").json()
        entry = next(m for m in report["models"] if m["model_id"] == "mock-reference")
        assert entry["per_metric"]["m7"]["mean"] == 1.0
        assert entry["per_metric"]["m7"]["n"] == 1  # consensus replaced both raters

    def test_consensus_requires_both_sheets(self, api):
        response = requests.post(
            f"{api}/api/cases/case-001/consensus",
            json={"model_id": "mock-reference", "rater_a": "alice", "rater_b": "bob"},
        )
        assert response.status_code == 400

    def test_fallback_index_served(self, api):
        response = requests.get(f"{api}/")
        assert response.status_code == 200
        assert "crashviz" in response.text

    def test_unknown_api_path(self, api):
        assert requests.get(f"{api}/api/nope").status_code == 404


class TestStaticUi:
    def test_ui_dir_served(self, seeded_store, tmp_path):
        ui_dir = tmp_path / "dist"
        ui_dir.mkdir()
        (ui_dir / "index.html").write_text("<html><body>review ui</body></html>")
        (ui_dir / "app.js").write_text("console.log('ok');")
        server = make_server(seeded_store, "127.0.0.1:0", ui_dir=ui_dir)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        host, port = server.server_address[:2]
        try:
            index = requests.get(f"http://{host}:{port}/")
            assert "review ui" in index.text
            js = requests.get(f"http://{host}:{port}/app.js")
            assert js.headers["Content-Type"].startswith("text/javascript")
            missing = requests.get(f"http://{host}:{port}/missing.css")
            assert missing.status_code == 404
            escape = requests.get(f"http://{host}:{port}/../secrets")
            assert escape.status_code == 404
        finally:
            server.shutdown()
            server.server_close()
