from __future__ import annotations

import json
from pathlib import Path

import pytest

from crashviz.fixtures import corpus_json, synthetic_corpus
from crashviz.geometry import standard_template
from crashviz.records import CollisionType, CrashRecord, VehicleRecord
from crashviz.store import CaseStore

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def template():
    return standard_template()


@pytest.fixture(scope="session")
def corpus():
    return synthetic_corpus(79)


@pytest.fixture()
def store(tmp_path) -> CaseStore:
    return CaseStore(tmp_path / "store")


@pytest.fixture()
def records_file(tmp_path, corpus) -> Path:
    path = tmp_path / "records.json"
    path.write_text(corpus_json(corpus), encoding="utf-8")
    return path


def make_record(
    case_id: str = "case-fixture",
    v1=("East", "North", 2),
    v2=("South", "North", 9),
    collision: str = "Right Angle",
    narrative: str = (
        "V1 entered the roundabout from Dunning Street (eastbound) and failed "
        "to yield to V2 already circulating from US 9/US 7 (southbound)."
    ),
    **kwargs,
) -> CrashRecord:
    return CrashRecord(
        case_id=case_id,
        location="US 9 / NY 67 roundabout, Malta NY",
        narrative=narrative,
        vehicles=(
            VehicleRecord("V1", v1[0], v1[1], v1[2]),
            VehicleRecord("V2", v2[0], v2[1], v2[2]),
        ),
        collision_type=CollisionType.from_text(collision),
        **kwargs,
    )


def record_doc(record: CrashRecord) -> dict:
    from crashviz.records import record_to_dict

    return record_to_dict(record)


def doc_bytes(doc: dict) -> bytes:
    return json.dumps(doc).encode("utf-8")
