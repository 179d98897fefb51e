"""Binary rubric scoring: ten metrics per diagram, one point each.

Annotated scene graphs are scored automatically; raster outputs have no
machine-readable content and go through the human score-sheet channel
(CSV ingestion plus two-rater merge with conflict resolution).
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .errors import MismatchedCase, SchemaViolation
from .geometry import GeometryTemplate, point_in_roadway, quadrant_of, world_to_body, zone_centroid
from .records import CrashRecord, is_localized_code
from .scene import SceneGraph, VehicleGlyph, build_scene

AUTO_RATER = "auto"
CONSENSUS_RATER = "consensus"


class MetricId(enum.Enum):
    """The ten rubric metrics, in scoring order."""

    COLLISION_TYPE_EXTRACTION = "m1"
    LABEL_V1 = "m2"
    LABEL_V2 = "m3"
    COLLISION_LOCATION = "m4"
    COLLISION_POINT_ACCURACY = "m5"
    V1_CODE_EXTRACTION = "m6"
    V1_CODE_VISUAL = "m7"
    V2_CODE_EXTRACTION = "m8"
    V2_CODE_VISUAL = "m9"
    CLARITY_PROPORTION = "m10"

    @property
    def column(self) -> str:
        return self.value


METRIC_ORDER: tuple[MetricId, ...] = tuple(MetricId)

METRIC_LABELS: dict[MetricId, str] = {
    MetricId.COLLISION_TYPE_EXTRACTION: "Collision Type Extraction",
    MetricId.LABEL_V1: "Vehicle Labeling–V1",
    MetricId.LABEL_V2: "Vehicle Labeling–V2",
    MetricId.COLLISION_LOCATION: "Collision Location",
    MetricId.COLLISION_POINT_ACCURACY: "Collision Point Accuracy",
    MetricId.V1_CODE_EXTRACTION: "V1 Damage Code–Extraction Accuracy",
    MetricId.V1_CODE_VISUAL: "V1 Damage Code–Visual Consistency",
    MetricId.V2_CODE_EXTRACTION: "V2 Damage Code–Extraction Accuracy",
    MetricId.V2_CODE_VISUAL: "V2 Damage Code–Visual Consistency",
    MetricId.CLARITY_PROPORTION: "Overall Clarity and Proportion",
}

METRIC_DESCRIPTIONS: dict[MetricId, str] = {
    MetricId.COLLISION_TYPE_EXTRACTION: (
        "Correct collision type (e.g., rear-end, angle) is accurately extracted "
        "from the report and depicted in the diagram."
    ),
    MetricId.LABEL_V1: 'Vehicle 1 is clearly labeled as "V1" in the crash diagram.',
    MetricId.LABEL_V2: 'Vehicle 2 is clearly labeled as "V2" in the crash diagram.',
    MetricId.COLLISION_LOCATION: (
        "The crash is depicted in the correct quadrant or at the correct "
        "entry/exit point of the roundabout."
    ),
    MetricId.COLLISION_POINT_ACCURACY: (
        "The exact spot of vehicle impact is accurately marked in the diagram."
    ),
    MetricId.V1_CODE_EXTRACTION: (
        "The damage code for Vehicle 1 is accurately extracted from the crash report."
    ),
    MetricId.V1_CODE_VISUAL: (
        "The damage on Vehicle 1 is visually consistent with the extracted damage "
        "code (e.g., left front corner)."
    ),
    MetricId.V2_CODE_EXTRACTION: (
        "The damage code for Vehicle 2 is accurately extracted from the crash report."
    ),
    MetricId.V2_CODE_VISUAL: (
        "The damage on Vehicle 2 is visually consistent with the extracted damage "
        "code (e.g., right rear side)."
    ),
    MetricId.CLARITY_PROPORTION: (
        "The roundabout layout, lane markings, and vehicle illustrations are "
        "proportionate and clearly presented."
    ),
}


@dataclass(frozen=True)
class Tolerances:
    """Geometric slack for the automated predicates. The human raters'
    tolerances were implicit; these defaults are half a lane width for the
    impact point, a label-to-glyph leash, a zone cone, and a ring-size
    proportion band."""

    point_epsilon_ft: float = 7.5
    label_delta_ft: float = 10.0
    zone_angle_deg: float = 45.0
    proportion_slack: float = 0.10

    def __post_init__(self) -> None:
        for name in ("point_epsilon_ft", "label_delta_ft", "zone_angle_deg", "proportion_slack"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ScoreSheet:
    """One rater's ten binary outcomes for one case/model pair."""

    case_id: str
    model_id: str
    rater_id: str
    scores: Mapping[MetricId, int]
    notes: Mapping[MetricId, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        missing = [m.column for m in METRIC_ORDER if m not in self.scores]
        if missing:
            raise SchemaViolation(",".join(missing), "score sheet must cover all ten metrics")
        for metric, value in self.scores.items():
            if value not in (0, 1):
                raise SchemaViolation(metric.column, f"scores are binary, got {value!r}")

    @property
    def total(self) -> int:
        return sum(self.scores[m] for m in METRIC_ORDER)

    @property
    def is_auto(self) -> bool:
        return self.rater_id == AUTO_RATER


@dataclass(frozen=True)
class ConsensusSheet:
    """Two-rater merge: agreed metrics carry scores, disagreements are
    listed until a resolution is entered."""

    case_id: str
    model_id: str
    scores: Mapping[MetricId, int]
    conflicts: tuple[MetricId, ...] = ()
    resolution_notes: Mapping[MetricId, str] = field(default_factory=dict)

    @property
    def is_resolved(self) -> bool:
        return all(m in self.scores for m in METRIC_ORDER)

    def resolve(self, metric: MetricId, value: int, note: str) -> "ConsensusSheet":
        if metric not in self.conflicts:
            raise MismatchedCase(f"{metric.column} is not in conflict")
        if value not in (0, 1):
            raise SchemaViolation(metric.column, f"scores are binary, got {value!r}")
        scores = dict(self.scores)
        scores[metric] = value
        notes = dict(self.resolution_notes)
        notes[metric] = note
        return replace(self, scores=scores, resolution_notes=notes)

    def to_score_sheet(self) -> ScoreSheet:
        if not self.is_resolved:
            unresolved = [m.column for m in self.conflicts if m not in self.scores]
            raise MismatchedCase(f"unresolved conflicts: {', '.join(unresolved)}")
        return ScoreSheet(
            case_id=self.case_id,
            model_id=self.model_id,
            rater_id=CONSENSUS_RATER,
            scores=dict(self.scores),
            notes=dict(self.resolution_notes),
        )


def _normalize_type(text: str) -> str:
    return "".join(ch for ch in text.lower() if ch.isalnum())


def _label_score(scene: SceneGraph, label: str, tol: Tolerances) -> int:
    glyph = scene.glyph(label)
    if glyph is None:
        return 0
    for item in scene.labels:
        if item.text == label:
            if math.dist(item.anchor, glyph.center) <= tol.label_delta_ft:
                return 1
    return 0


def _code_visual_score(glyph: VehicleGlyph | None, truth_code: int, tol: Tolerances) -> int:
    if glyph is None or not is_localized_code(truth_code):
        return 0
    body = world_to_body(
        (glyph.marker_x - glyph.x, glyph.marker_y - glyph.y), glyph.heading_deg
    )
    if truth_code == 13:
        # Interior zone: the marker must sit inside the body, not on its rim.
        if glyph.length_ft <= 0 or glyph.width_ft <= 0:
            return 0
        fx = body[0] / glyph.length_ft
        fy = body[1] / glyph.width_ft
        return 1 if abs(fx) <= 0.35 and abs(fy) <= 0.30 else 0
    direction = np.array(zone_centroid(truth_code), dtype=float)
    norm_body = float(np.linalg.norm(body))
    norm_dir = float(np.linalg.norm(direction))
    if norm_body < 1e-9:
        return 0
    cos = float(body @ direction) / (norm_body * norm_dir)
    angle = math.degrees(math.acos(max(-1.0, min(1.0, cos))))
    return 1 if angle <= tol.zone_angle_deg else 0


def _glyph_polygon_clear_of_island(glyph: VehicleGlyph, template: GeometryTemplate) -> bool:
    from .geometry import rect_origin_clearance

    return (
        rect_origin_clearance(glyph.center, glyph.heading_deg, glyph.length_ft, glyph.width_ft)
        >= template.island_radius
    )


def _clarity_score(scene: SceneGraph, template: GeometryTemplate, tol: Tolerances) -> int:
    if not scene.vehicles:
        return 0
    for glyph in scene.vehicles:
        if not point_in_roadway(glyph.center, template):
            return 0
        if not _glyph_polygon_clear_of_island(glyph, template):
            return 0
    ref = scene.template
    if abs(ref.island_radius - template.island_radius) > tol.proportion_slack * template.island_radius:
        return 0
    if abs(ref.outer_radius - template.outer_radius) > tol.proportion_slack * template.outer_radius:
        return 0
    anchors = [l.anchor for l in scene.labels]
    for i in range(len(anchors)):
        for j in range(i + 1, len(anchors)):
            if math.dist(anchors[i], anchors[j]) < 5.0:
                return 0
    return 1


def evaluate_auto(
    candidate: SceneGraph,
    truth: CrashRecord,
    template: GeometryTemplate,
    tol: Tolerances | None = None,
    *,
    model_id: str = "reference",
) -> ScoreSheet:
    """Score an annotated candidate scene against the record's reference.

    The reference impact point is the deterministic build_scene solution
    for the truth record. Missing structure never raises: absent glyphs,
    labels, markers or info box simply zero the affected metrics, and a
    structurally empty scene scores all-zero with a note.
    """
    tol = tol or Tolerances()
    reference = build_scene(truth, template)
    ref_impact = reference.impact
    v1, v2 = truth.vehicles

    scores: dict[MetricId, int] = {}
    notes: dict[MetricId, str] = {}

    box = candidate.info_box
    scores[MetricId.COLLISION_TYPE_EXTRACTION] = (
        1
        if box is not None
        and _normalize_type(box.collision_type)
        == _normalize_type(truth.collision_type.display)
        else 0
    )
    scores[MetricId.LABEL_V1] = _label_score(candidate, "V1", tol)
    scores[MetricId.LABEL_V2] = _label_score(candidate, "V2", tol)

    if candidate.impact is None or ref_impact is None:
        scores[MetricId.COLLISION_LOCATION] = 0
        scores[MetricId.COLLISION_POINT_ACCURACY] = 0
    else:
        scores[MetricId.COLLISION_LOCATION] = (
            1
            if quadrant_of(candidate.impact, template) == quadrant_of(ref_impact, template)
            else 0
        )
        scores[MetricId.COLLISION_POINT_ACCURACY] = (
            1 if math.dist(candidate.impact, ref_impact) <= tol.point_epsilon_ft else 0
        )

    scores[MetricId.V1_CODE_EXTRACTION] = (
        1 if box is not None and box.v1_code == v1.damage_code else 0
    )
    scores[MetricId.V2_CODE_EXTRACTION] = (
        1 if box is not None and box.v2_code == v2.damage_code else 0
    )
    scores[MetricId.V1_CODE_VISUAL] = _code_visual_score(
        candidate.glyph("V1"), v1.damage_code, tol
    )
    scores[MetricId.V2_CODE_VISUAL] = _code_visual_score(
        candidate.glyph("V2"), v2.damage_code, tol
    )
    scores[MetricId.CLARITY_PROPORTION] = _clarity_score(candidate, template, tol)

    if not candidate.vehicles and candidate.info_box is None:
        notes[MetricId.CLARITY_PROPORTION] = "structurally empty scene"

    return ScoreSheet(
        case_id=truth.case_id,
        model_id=model_id,
        rater_id=AUTO_RATER,
        scores=scores,
        notes=notes,
    )


# --- Score sheet CSV channel --------------------------------------------------

SHEET_COLUMNS = ("case_id", "model_id", "rater_id") + tuple(
    m.column for m in METRIC_ORDER
) + ("notes",)


def sheet_to_row(sheet: ScoreSheet) -> list[str]:
    notes = (
        json.dumps({m.column: text for m, text in sheet.notes.items()}, sort_keys=True)
        if sheet.notes
        else ""
    )
    return [sheet.case_id, sheet.model_id, sheet.rater_id] + [
        str(sheet.scores[m]) for m in METRIC_ORDER
    ] + [notes]


def sheets_to_csv(sheets: Iterable[ScoreSheet]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SHEET_COLUMNS)
    for sheet in sheets:
        writer.writerow(sheet_to_row(sheet))
    return buffer.getvalue().encode("utf-8")


def ingest_sheets(document: bytes | str) -> list[ScoreSheet]:
    """Parse a score-sheet CSV document, enforcing the binary invariant.

    Row numbers in errors are 1-based over data rows (the header is row 0).
    """
    text = document.decode("utf-8") if isinstance(document, bytes) else document
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaViolation("header", "empty document") from None
    if tuple(header) != SHEET_COLUMNS:
        raise SchemaViolation("header", f"expected columns {','.join(SHEET_COLUMNS)}")
    sheets: list[ScoreSheet] = []
    for row_number, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(SHEET_COLUMNS):
            raise SchemaViolation("row", "wrong column count", row=row_number)
        case_id, model_id, rater_id = row[0], row[1], row[2]
        if not case_id or not model_id or not rater_id:
            raise SchemaViolation("case_id", "identifier columns must be non-empty", row=row_number)
        scores: dict[MetricId, int] = {}
        for metric, cell in zip(METRIC_ORDER, row[3:13]):
            if cell not in ("0", "1"):
                raise SchemaViolation(
                    metric.column, f"scores are binary, got {cell!r}", row=row_number
                )
            scores[metric] = int(cell)
        notes: dict[MetricId, str] = {}
        notes_cell = row[13]
        if notes_cell:
            try:
                raw = json.loads(notes_cell)
            except json.JSONDecodeError as exc:
                raise SchemaViolation("notes", f"notes must be JSON: {exc}", row=row_number)
            if not isinstance(raw, dict):
                raise SchemaViolation("notes", "notes must be a JSON object", row=row_number)
            by_column = {m.column: m for m in METRIC_ORDER}
            for key, value in raw.items():
                if key not in by_column or not isinstance(value, str):
                    raise SchemaViolation("notes", f"bad notes entry: {key!r}", row=row_number)
                notes[by_column[key]] = value
        sheets.append(
            ScoreSheet(
                case_id=case_id,
                model_id=model_id,
                rater_id=rater_id,
                scores=scores,
                notes=notes,
            )
        )
    return sheets


def merge_ratings(a: ScoreSheet, b: ScoreSheet) -> ConsensusSheet:
    """Merge two human raters' sheets for the same case and model.

    Agreements copy through; disagreements are listed as conflicts with no
    automatic resolution — those get settled by discussion and entered via
    the review UI or CLI.
    """
    if a.case_id != b.case_id or a.model_id != b.model_id:
        raise MismatchedCase(
            f"cannot merge {a.case_id}/{a.model_id} with {b.case_id}/{b.model_id}"
        )
    if a.is_auto or b.is_auto:
        raise MismatchedCase("consensus merging applies to human raters only")
    scores: dict[MetricId, int] = {}
    conflicts: list[MetricId] = []
    for metric in METRIC_ORDER:
        if a.scores[metric] == b.scores[metric]:
            scores[metric] = a.scores[metric]
        else:
            conflicts.append(metric)
    return ConsensusSheet(
        case_id=a.case_id,
        model_id=a.model_id,
        scores=scores,
        conflicts=tuple(conflicts),
    )
