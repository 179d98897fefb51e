"""Structured crash records and the domain vocabularies they rely on.

A record captures one two-vehicle roundabout incident as reported on a
police form: which legs each vehicle used, the coded point of impact, the
collision classification, and the free-text narrative. Records are
immutable value objects; parsing, serialization and validation are pure.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import (
    DuplicateVehicleLabel,
    InvalidRecord,
    MalformedDocument,
    SchemaViolation,
    UnsupportedCode,
)

COMPASS_POSITIONS = ("North", "East", "South", "West")

DEFAULT_ROAD_NAMES = {
    "North": "US 9",
    "East": "Dunning Street",
    "South": "US 9 / US 7",
    "West": "NY 67",
}

#: Body-zone descriptions for the localized damage codes. Codes 14..19 are
#: accepted on records but describe non-localized outcomes (undercarriage
#: damage, overturned vehicle, ...) with no single body zone, so they have
#: no entry here.
DAMAGE_CODE_DESCRIPTIONS = {
    1: "Left Front Corner",
    2: "Front Center",
    3: "Right Front Corner",
    4: "Right Front Fender",
    5: "Right Side Door",
    6: "Right Rear Fender",
    7: "Right Rear Light",
    8: "Rear Trunk Center",
    9: "Left Rear Light",
    10: "Left Rear Fender",
    11: "Left Side Door",
    12: "Left Front Fender",
    13: "Top or Undercarriage",
}

MIN_DAMAGE_CODE = 1
MAX_DAMAGE_CODE = 19
MAX_LOCALIZED_CODE = 13

VEHICLE_LABELS = ("V1", "V2")

#: The eight named collision classifications, in the order the scoring
#: prompt lists them. Anything else is carried through as Other.
COLLISION_KINDS = (
    "Rear-End",
    "Overtaking",
    "Right Turn",
    "Left Turn",
    "Right Angle",
    "Head-On",
    "Right Turn (variation)",
    "Sideswipe",
)

OTHER_KIND = "Other"


def is_localized_code(code: int) -> bool:
    return MIN_DAMAGE_CODE <= code <= MAX_LOCALIZED_CODE


def damage_code_description(code: int) -> str:
    """Return the body-zone description for a localized damage code.

    Raises UnsupportedCode for 14..19 (and anything outside 1..19): those
    codes name outcomes, not body zones.
    """
    if code in DAMAGE_CODE_DESCRIPTIONS:
        return DAMAGE_CODE_DESCRIPTIONS[code]
    raise UnsupportedCode(f"no body-zone description for damage code {code}")


def _normalize_label(text: str) -> str:
    return "".join(ch for ch in text.lower() if ch.isalnum())


_KIND_BY_NORMALIZED = {_normalize_label(kind): kind for kind in COLLISION_KINDS}


@dataclass(frozen=True)
class CollisionType:
    """Collision classification: one of the eight named kinds, or Other.

    ``kind`` holds the canonical display string for named kinds; for
    unrecognized labels ``kind`` is "Other" and ``other_label`` keeps the
    raw text.
    """

    kind: str
    other_label: str | None = None

    def __post_init__(self) -> None:
        if self.kind == OTHER_KIND:
            if not self.other_label:
                raise InvalidRecord("Other collision type requires a label")
        elif self.kind not in COLLISION_KINDS:
            raise InvalidRecord(f"unknown collision kind: {self.kind!r}")
        elif self.other_label is not None:
            raise InvalidRecord("other_label only applies to Other")

    @property
    def display(self) -> str:
        return self.other_label if self.kind == OTHER_KIND else self.kind

    @property
    def is_standard(self) -> bool:
        return self.kind != OTHER_KIND

    @classmethod
    def from_text(cls, text: str) -> "CollisionType":
        kind = _KIND_BY_NORMALIZED.get(_normalize_label(text))
        if kind is not None:
            return cls(kind)
        return cls(OTHER_KIND, text)


@dataclass(frozen=True)
class VehicleRecord:
    """One vehicle's role in the incident."""

    label: str
    entry_leg: str
    exit_leg: str
    damage_code: int
    pre_impact_action: str | None = None

    def __post_init__(self) -> None:
        if self.label not in VEHICLE_LABELS:
            raise InvalidRecord(f"vehicle label must be V1 or V2, got {self.label!r}")
        for name, leg in (("entry_leg", self.entry_leg), ("exit_leg", self.exit_leg)):
            if leg not in COMPASS_POSITIONS:
                raise InvalidRecord(f"{name} must be a compass position, got {leg!r}")
        if not (MIN_DAMAGE_CODE <= self.damage_code <= MAX_DAMAGE_CODE):
            raise InvalidRecord(f"damage code out of range: {self.damage_code}")


@dataclass(frozen=True)
class CrashRecord:
    """A complete structured incident: exactly two vehicles, V1 then V2."""

    case_id: str
    location: str
    narrative: str
    vehicles: tuple[VehicleRecord, VehicleRecord]
    collision_type: CollisionType
    conditions: Mapping[str, str] = field(default_factory=dict)
    report_image_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.case_id:
            raise InvalidRecord("case_id must be non-empty")
        if not self.narrative or not self.narrative.strip():
            raise InvalidRecord("narrative must be non-empty")
        if len(self.vehicles) != 2:
            raise InvalidRecord("exactly two vehicles required")
        labels = [v.label for v in self.vehicles]
        if labels[0] == labels[1]:
            raise DuplicateVehicleLabel(f"both vehicles labeled {labels[0]}")
        if labels != ["V1", "V2"]:
            raise InvalidRecord("vehicles must be ordered V1 then V2")

    def vehicle(self, label: str) -> VehicleRecord:
        for v in self.vehicles:
            if v.label == label:
                return v
        raise KeyError(label)


_TOP_LEVEL_REQUIRED = ("case_id", "location", "narrative", "collision_type", "vehicles")
_TOP_LEVEL_OPTIONAL = ("conditions", "report_image_ref")
_VEHICLE_REQUIRED = ("label", "entry_leg", "exit_leg", "damage_code")
_VEHICLE_OPTIONAL = ("pre_impact_action",)


def _require_str(obj: Mapping[str, Any], key: str, *, allow_empty: bool = True) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or (not allow_empty and not value.strip()):
        raise SchemaViolation(key)
    return value


def _parse_vehicle(obj: Any, index: int) -> VehicleRecord:
    prefix = f"vehicles[{index}]"
    if not isinstance(obj, dict):
        raise SchemaViolation(prefix, "vehicle entry must be an object")
    for key in obj:
        if key not in _VEHICLE_REQUIRED + _VEHICLE_OPTIONAL:
            raise SchemaViolation(f"{prefix}.{key}", f"unexpected field: {key}")
    label = obj.get("label")
    if label not in VEHICLE_LABELS:
        raise SchemaViolation(f"{prefix}.label")
    legs = {}
    for key in ("entry_leg", "exit_leg"):
        value = obj.get(key)
        if value not in COMPASS_POSITIONS:
            raise SchemaViolation(f"{prefix}.{key}")
        legs[key] = value
    code = obj.get("damage_code")
    if not isinstance(code, int) or isinstance(code, bool) or not (
        MIN_DAMAGE_CODE <= code <= MAX_DAMAGE_CODE
    ):
        raise SchemaViolation(f"{prefix}.damage_code")
    action = obj.get("pre_impact_action")
    if action is not None and not isinstance(action, str):
        raise SchemaViolation(f"{prefix}.pre_impact_action")
    return VehicleRecord(
        label=label,
        entry_leg=legs["entry_leg"],
        exit_leg=legs["exit_leg"],
        damage_code=code,
        pre_impact_action=action,
    )


def parse_record(data: bytes | str) -> CrashRecord:
    """Parse a UTF-8 JSON record document into a CrashRecord.

    Field names are bit-exact; unknown top-level keys are rejected, while
    arbitrary string entries inside ``conditions`` are preserved.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"not UTF-8: {exc}") from exc
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("record document must be a JSON object")

    for key in doc:
        if key not in _TOP_LEVEL_REQUIRED + _TOP_LEVEL_OPTIONAL:
            raise SchemaViolation(key, f"unexpected field: {key}")
    for key in _TOP_LEVEL_REQUIRED:
        if key not in doc:
            raise SchemaViolation(key)

    case_id = _require_str(doc, "case_id", allow_empty=False)
    location = _require_str(doc, "location")
    narrative = _require_str(doc, "narrative", allow_empty=False)
    collision_text = _require_str(doc, "collision_type", allow_empty=False)

    vehicles_doc = doc["vehicles"]
    if not isinstance(vehicles_doc, list) or len(vehicles_doc) != 2:
        raise SchemaViolation("vehicles", "exactly two vehicle entries required")
    vehicles = [_parse_vehicle(v, i) for i, v in enumerate(vehicles_doc)]
    if vehicles[0].label == vehicles[1].label:
        raise DuplicateVehicleLabel(f"both vehicles labeled {vehicles[0].label}")
    vehicles.sort(key=lambda v: v.label)

    conditions_doc = doc.get("conditions", {})
    if not isinstance(conditions_doc, dict):
        raise SchemaViolation("conditions")
    for key, value in conditions_doc.items():
        if not isinstance(key, str) or not isinstance(value, str):
            raise SchemaViolation(f"conditions.{key}", "conditions entries must be strings")

    image_ref = doc.get("report_image_ref")
    if image_ref is not None and not isinstance(image_ref, str):
        raise SchemaViolation("report_image_ref")

    return CrashRecord(
        case_id=case_id,
        location=location,
        narrative=narrative,
        vehicles=(vehicles[0], vehicles[1]),
        collision_type=CollisionType.from_text(collision_text),
        conditions=dict(conditions_doc),
        report_image_ref=image_ref,
    )


def record_to_dict(record: CrashRecord) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "case_id": record.case_id,
        "location": record.location,
        "narrative": record.narrative,
        "collision_type": record.collision_type.display,
        "vehicles": [
            {
                "label": v.label,
                "entry_leg": v.entry_leg,
                "exit_leg": v.exit_leg,
                "damage_code": v.damage_code,
                "pre_impact_action": v.pre_impact_action,
            }
            for v in record.vehicles
        ],
    }
    if record.conditions:
        doc["conditions"] = dict(record.conditions)
    if record.report_image_ref is not None:
        doc["report_image_ref"] = record.report_image_ref
    return doc


def serialize_record(record: CrashRecord) -> bytes:
    """Serialize a record to the UTF-8 JSON document schema.

    parse_record(serialize_record(r)) == r for every valid record.
    """
    return (json.dumps(record_to_dict(record), indent=2, ensure_ascii=False) + "\n").encode(
        "utf-8"
    )


@dataclass(frozen=True)
class ValidationFinding:
    level: str  # "warning" | "error"
    field: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[ValidationFinding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    @property
    def warnings(self) -> tuple[ValidationFinding, ...]:
        return tuple(f for f in self.findings if f.level == "warning")

    @property
    def errors(self) -> tuple[ValidationFinding, ...]:
        return tuple(f for f in self.findings if f.level == "error")


def validate_record(record: CrashRecord) -> ValidationReport:
    """Check a record against the dataset inclusion criteria.

    An empty report means the record carries everything downstream stages
    need: a narrative, directional indicators per vehicle, localized
    damage codes, and a standard collision classification.
    """
    findings: list[ValidationFinding] = []
    if not record.narrative.strip():
        findings.append(ValidationFinding("error", "narrative", "narrative is empty"))
    for v in record.vehicles:
        prefix = f"vehicles[{v.label}]"
        if v.entry_leg not in COMPASS_POSITIONS or v.exit_leg not in COMPASS_POSITIONS:
            findings.append(
                ValidationFinding("error", prefix, "missing directional indicators")
            )
        if not is_localized_code(v.damage_code):
            findings.append(
                ValidationFinding(
                    "warning",
                    f"{prefix}.damage_code",
                    "non-localized damage code: auto visual-consistency unavailable",
                )
            )
    if not record.collision_type.is_standard:
        findings.append(
            ValidationFinding(
                "warning",
                "collision_type",
                f"non-standard collision type: {record.collision_type.display!r}",
            )
        )
    return ValidationReport(tuple(findings))
