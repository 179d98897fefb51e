from __future__ import annotations

import json

import pytest

from crashviz.cli import main
from crashviz.fixtures import corpus_json, synthetic_corpus
from crashviz.records import record_to_dict
from crashviz.store import CaseStore

from conftest import make_record


@pytest.fixture()
def store_root(tmp_path):
    return tmp_path / "store"


@pytest.fixture()
def small_records(tmp_path):
    path = tmp_path / "records.json"
    path.write_text(corpus_json(synthetic_corpus(4)), encoding="utf-8")
    return path


def test_ingest_then_validate(store_root, small_records, capsys):
    assert main(["ingest", str(small_records), "--store", str(store_root)]) == 0
    out = capsys.readouterr().out
    assert "ingested 4/4" in out
    assert main(["validate", "--store", str(store_root)]) == 0


def test_ingest_reports_corrupt_records(store_root, tmp_path, capsys):
    docs = [record_to_dict(make_record(case_id="case-ok"))]
    docs.append({"case_id": "case-bad"})
    path = tmp_path / "mixed.json"
    path.write_text(json.dumps(docs), encoding="utf-8")
    assert main(["ingest", str(path), "--store", str(store_root)]) == 2
    assert "SKIPPED" in capsys.readouterr().out


def test_validate_flags_non_localized_codes(store_root, tmp_path, capsys):
    docs = [record_to_dict(make_record(case_id="case-17", v1=("East", "North", 17)))]
    path = tmp_path / "records.json"
    path.write_text(json.dumps(docs), encoding="utf-8")
    assert main(["validate", str(path)]) == 0
    assert "non-localized damage code" in capsys.readouterr().out


def test_full_mock_pipeline(store_root, small_records, capsys):
    assert main(["ingest", str(small_records), "--store", str(store_root)]) == 0
    assert main(["prompt", "--store", str(store_root)]) == 0
    assert main(["render", "--store", str(store_root)]) == 0
    assert (
        main(["generate", "--store", str(store_root), "--mock", "--run-id", "cli-test"]) == 0
    )
    assert main(["evaluate", "--store", str(store_root), "--mode", "auto"]) == 0
    out = capsys.readouterr().out
    assert "10/10" in out
    assert main(["benchmark", "--store", str(store_root), "--format", "markdown"]) == 0
    table = capsys.readouterr().out
    assert "| Metric | mock-reference |" in table
    assert "1.00 [high]" in table


def test_benchmark_json_to_file(store_root, small_records, tmp_path, capsys):
    main(["ingest", str(small_records), "--store", str(store_root)])
    main(["generate", "--store", str(store_root), "--mock"])
    main(["evaluate", "--store", str(store_root)])
    out_path = tmp_path / "report.json"
    assert main(
        ["benchmark", "--store", str(store_root), "--format", "json", "--out", str(out_path)]
    ) == 0
    doc = json.loads(out_path.read_text())
    assert doc["models"][0]["model_id"] == "mock-reference"


def test_benchmark_empty_store(store_root, capsys):
    assert main(["benchmark", "--store", str(store_root)]) == 2


def test_evaluate_ingest_mode(store_root, small_records, tmp_path):
    main(["ingest", str(small_records), "--store", str(store_root)])
    store = CaseStore(store_root)
    from crashviz.evaluation import METRIC_ORDER, ScoreSheet, sheets_to_csv

    sheets = [
        ScoreSheet("case-001", "gpt-4o", "alice", {m: 1 for m in METRIC_ORDER}),
        ScoreSheet("case-002", "gpt-4o", "alice", {m: 0 for m in METRIC_ORDER}),
    ]
    csv_path = tmp_path / "sheets.csv"
    csv_path.write_bytes(sheets_to_csv(sheets))
    assert main(
        ["evaluate", "--store", str(store_root), "--mode", "ingest", "--sheets", str(csv_path)]
    ) == 0
    assert len(list(store.iter_sheets("case-001"))) == 1


def test_generate_requires_backend(store_root, small_records, capsys):
    main(["ingest", str(small_records), "--store", str(store_root)])
    assert main(["generate", "--store", str(store_root)]) == 2


def test_generate_partial_failure_exit_code(store_root, tmp_path):
    docs = [
        record_to_dict(make_record(case_id="case-ok")),
        record_to_dict(make_record(case_id="case-bad", v1=("East", "North", 18))),
    ]
    path = tmp_path / "records.json"
    path.write_text(json.dumps(docs), encoding="utf-8")
    assert main(["generate", "--store", str(store_root), "--mock", "--records", str(path)]) == 2


def test_store_env_default(tmp_path, small_records, monkeypatch, capsys):
    monkeypatch.setenv("CRASHVIZ_STORE", str(tmp_path / "env-store"))
    assert main(["ingest", str(small_records)]) == 0
    assert (tmp_path / "env-store" / "cases" / "case-001" / "record.json").is_file()


def test_custom_template_flag(store_root, small_records, tmp_path, capsys):
    from crashviz.geometry import standard_template

    doc = standard_template().to_json_dict()
    for leg in doc["legs"]:
        if leg["position"] == "East":
            leg["road_name"] = "Main St"
    template_path = tmp_path / "template.json"
    template_path.write_text(json.dumps(doc), encoding="utf-8")
    main(["ingest", str(small_records), "--store", str(store_root)])
    assert main(
        ["prompt", "--store", str(store_root), "--template", str(template_path)]
    ) == 0
    store = CaseStore(store_root)
    prompt_text = store.read_artifact("case-001", "prompt.txt").decode("utf-8")
    assert "Eastbound: Main St" in prompt_text
