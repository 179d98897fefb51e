from __future__ import annotations

import dataclasses

import pytest

from crashviz.errors import MismatchedCase, SchemaViolation
from crashviz.evaluation import (
    METRIC_DESCRIPTIONS,
    METRIC_LABELS,
    METRIC_ORDER,
    MetricId,
    ScoreSheet,
    Tolerances,
    evaluate_auto,
    ingest_sheets,
    merge_ratings,
    sheets_to_csv,
)
from crashviz.scene import SceneGraph, build_scene

from conftest import make_record
from perturbations import ALLOWED_COFLIPS, corrupt


def _sheet(case="case-a", model="m", rater="alice", flip=None) -> ScoreSheet:
    scores = {m: 1 for m in METRIC_ORDER}
    if flip is not None:
        scores[flip] = 0
    return ScoreSheet(case_id=case, model_id=model, rater_id=rater, scores=scores)


class TestMetricVocabulary:
    def test_exactly_ten_in_rubric_order(self):
        assert len(METRIC_ORDER) == 10
        assert [m.column for m in METRIC_ORDER] == [f"m{i}" for i in range(1, 11)]
        assert METRIC_LABELS[MetricId.COLLISION_LOCATION] == "Collision Location"
        assert "correct quadrant or at the correct entry/exit point" in (
            METRIC_DESCRIPTIONS[MetricId.COLLISION_LOCATION]
        )


class TestEvaluateAuto:
    def test_self_consistency_perfect_score(self, template):
        record = make_record()
        sheet = evaluate_auto(build_scene(record, template), record, template)
        assert sheet.total == 10
        assert sheet.rater_id == "auto"
        assert sheet.case_id == record.case_id

    def test_idempotent(self, template):
        record = make_record()
        scene = build_scene(record, template)
        assert evaluate_auto(scene, record, template) == evaluate_auto(
            scene, record, template
        )

    def test_collision_type_flip_only_metric_one(self, template):
        record = make_record()
        scene = corrupt(build_scene(record, template), record, template,
                        MetricId.COLLISION_TYPE_EXTRACTION)
        sheet = evaluate_auto(scene, record, template)
        assert sheet.scores[MetricId.COLLISION_TYPE_EXTRACTION] == 0
        assert sheet.total == 9

    def test_collision_type_comparison_is_case_and_hyphen_insensitive(self, template):
        record = make_record(collision="Rear-End")
        scene = build_scene(record, template)
        box = dataclasses.replace(scene.info_box, collision_type="rear end")
        relabeled = dataclasses.replace(scene, info_box=box)
        sheet = evaluate_auto(relabeled, record, template)
        assert sheet.scores[MetricId.COLLISION_TYPE_EXTRACTION] == 1

    def test_quadrant_crossing_rotation_flips_4_and_5(self, template):
        record = make_record()
        scene = corrupt(build_scene(record, template), record, template,
                        MetricId.COLLISION_LOCATION)
        sheet = evaluate_auto(scene, record, template)
        assert sheet.scores[MetricId.COLLISION_LOCATION] == 0
        assert sheet.scores[MetricId.COLLISION_POINT_ACCURACY] == 0
        assert sheet.total == 8

    @pytest.mark.parametrize("metric", list(METRIC_ORDER))
    def test_each_targeted_corruption_flips_its_metric(self, template, metric):
        record = make_record(v1=("East", "North", 2), v2=("South", "West", 5))
        scene = build_scene(record, template)
        corrupted = corrupt(scene, record, template, metric)
        sheet = evaluate_auto(corrupted, record, template)
        assert sheet.scores[metric] == 0
        allowed = ALLOWED_COFLIPS.get(metric, set())
        for other in METRIC_ORDER:
            if other is metric or other in allowed:
                continue
            assert sheet.scores[other] == 1, f"{other} flipped unexpectedly"

    def test_interior_code_13_visual_consistency(self, template):
        record = make_record(v1=("East", "North", 13))
        scene = build_scene(record, template)
        sheet = evaluate_auto(scene, record, template)
        assert sheet.scores[MetricId.V1_CODE_VISUAL] == 1
        corrupted = corrupt(scene, record, template, MetricId.V1_CODE_VISUAL)
        assert evaluate_auto(corrupted, record, template).scores[MetricId.V1_CODE_VISUAL] == 0

    def test_structurally_empty_scene_scores_zero_with_note(self, template):
        record = make_record()
        empty = SceneGraph(template=template)
        sheet = evaluate_auto(empty, record, template)
        assert sheet.total == 0
        assert MetricId.CLARITY_PROPORTION in sheet.notes

    def test_missing_info_box_zeroes_only_extraction_metrics(self, template):
        record = make_record()
        scene = dataclasses.replace(build_scene(record, template), info_box=None)
        sheet = evaluate_auto(scene, record, template)
        zeroed = {m for m in METRIC_ORDER if sheet.scores[m] == 0}
        assert zeroed == {
            MetricId.COLLISION_TYPE_EXTRACTION,
            MetricId.V1_CODE_EXTRACTION,
            MetricId.V2_CODE_EXTRACTION,
        }

    def test_tolerances_must_be_positive(self):
        with pytest.raises(ValueError):
            Tolerances(point_epsilon_ft=0)

    def test_default_tolerances(self):
        tol = Tolerances()
        assert tol.point_epsilon_ft == 7.5
        assert tol.label_delta_ft == 10.0
        assert tol.zone_angle_deg == 45.0
        assert tol.proportion_slack == 0.10


class TestScoreSheets:
    def test_sheet_requires_all_ten(self):
        scores = {m: 1 for m in METRIC_ORDER}
        del scores[MetricId.CLARITY_PROPORTION]
        with pytest.raises(SchemaViolation):
            ScoreSheet("c", "m", "r", scores)

    def test_sheet_rejects_non_binary(self):
        scores = {m: 1 for m in METRIC_ORDER}
        scores[MetricId.LABEL_V1] = 2
        with pytest.raises(SchemaViolation):
            ScoreSheet("c", "m", "r", scores)

    def test_csv_round_trip(self):
        sheets = [
            _sheet("case-a", "model-x", "alice"),
            _sheet("case-b", "model-x", "bob", flip=MetricId.COLLISION_POINT_ACCURACY),
        ]
        sheets[1].notes[MetricId.COLLISION_POINT_ACCURACY] = 'impact drawn "off by a lane"'
        parsed = ingest_sheets(sheets_to_csv(sheets))
        assert parsed == sheets

    def test_79_row_fixture(self):
        sheets = [_sheet(f"case-{i:03d}", "model-x", "alice") for i in range(79)]
        assert len(ingest_sheets(sheets_to_csv(sheets))) == 79

    def test_non_binary_cell_names_row(self):
        doc = sheets_to_csv([_sheet()]).decode().replace("case-a,m,alice,1", "case-a,m,alice,2")
        with pytest.raises(SchemaViolation) as err:
            ingest_sheets(doc)
        assert err.value.row == 1

    def test_header_only_is_empty(self):
        header = sheets_to_csv([]).decode()
        assert ingest_sheets(header) == []

    def test_wrong_header_rejected(self):
        with pytest.raises(SchemaViolation):
            ingest_sheets("case,stuff\n")


class TestMergeRatings:
    def test_identical_sheets_no_conflicts(self):
        a = _sheet(rater="alice")
        b = _sheet(rater="bob")
        consensus = merge_ratings(a, b)
        assert consensus.conflicts == ()
        assert consensus.is_resolved
        assert {m: consensus.scores[m] for m in METRIC_ORDER} == dict(a.scores)

    def test_single_disagreement_listed(self):
        a = _sheet(rater="alice")
        b = _sheet(rater="bob", flip=MetricId.COLLISION_POINT_ACCURACY)
        consensus = merge_ratings(a, b)
        assert consensus.conflicts == (MetricId.COLLISION_POINT_ACCURACY,)
        assert not consensus.is_resolved
        resolved = consensus.resolve(
            MetricId.COLLISION_POINT_ACCURACY, 1, "marker within half a lane"
        )
        assert resolved.is_resolved
        sheet = resolved.to_score_sheet()
        assert sheet.rater_id == "consensus"
        assert sheet.scores[MetricId.COLLISION_POINT_ACCURACY] == 1

    def test_mismatched_case_rejected(self):
        with pytest.raises(MismatchedCase):
            merge_ratings(_sheet(case="case-a"), _sheet(case="case-b", rater="bob"))

    def test_auto_sheets_not_mergeable(self):
        with pytest.raises(MismatchedCase):
            merge_ratings(_sheet(rater="auto"), _sheet(rater="bob"))

    def test_unresolved_consensus_cannot_export(self):
        merged = merge_ratings(
            _sheet(rater="alice"), _sheet(rater="bob", flip=MetricId.LABEL_V2)
        )
        with pytest.raises(MismatchedCase):
            merged.to_score_sheet()
