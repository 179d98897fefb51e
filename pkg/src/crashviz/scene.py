"""Scene graphs for crash diagrams and their deterministic SVG rendering.

A SceneGraph is the machine-readable diagram: template geometry, two
vehicle glyphs, their paths, the impact marker, labels, and the info box.
Rendering is byte-deterministic (fixed element order, 2-decimal numbers,
no timestamps) and embeds the scene as canonical JSON inside the SVG so
the diagram can be parsed back exactly.
"""
from __future__ import annotations

import json
import math
import textwrap
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Any
from xml.sax.saxutils import escape

import numpy as np

from .errors import InvalidRecord, MalformedAnnotation, MissingAnnotation
from .geometry import (
    GeometryTemplate,
    VEHICLE_LENGTH_FT,
    VEHICLE_WIDTH_FT,
    azimuth_unit,
    body_to_world,
    compute_impact,
    compute_trajectory,
    point_in_roadway,
    rect_origin_clearance,
    zone_centroid,
)
from .records import CrashRecord

ANNOTATION_ID = "crashviz-scene"
NARRATIVE_LIMIT = 280
LABEL_OFFSET_FT = 8.0
MIN_LABEL_SPACING_FT = 5.0
ROAD_LABEL_CLEARANCE_FT = 10.0


def _q2(value: float) -> float:
    rounded = round(float(value), 2)
    return 0.0 if rounded == 0 else rounded


@dataclass(frozen=True)
class VehicleGlyph:
    label: str
    x: float
    y: float
    heading_deg: float
    length_ft: float
    width_ft: float
    marker_x: float
    marker_y: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def marker(self) -> tuple[float, float]:
        return (self.marker_x, self.marker_y)


@dataclass(frozen=True)
class ScenePath:
    label: str
    lane: str
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class InfoBox:
    collision_type: str
    v1_code: int
    v2_code: int
    narrative_summary: str


@dataclass(frozen=True)
class SceneLabel:
    text: str
    x: float
    y: float

    @property
    def anchor(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class SceneGraph:
    template: GeometryTemplate
    vehicles: tuple[VehicleGlyph, ...] = ()
    paths: tuple[ScenePath, ...] = ()
    impact: tuple[float, float] | None = None
    info_box: InfoBox | None = None
    labels: tuple[SceneLabel, ...] = ()

    def glyph(self, label: str) -> VehicleGlyph | None:
        for glyph in self.vehicles:
            if glyph.label == label:
                return glyph
        return None


@dataclass(frozen=True)
class RenderOptions:
    scale: float = 4.0  # pixels per foot
    margin_ft: float = 20.0
    palette: str = "default"
    embed_annotation: bool = True

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise InvalidRecord("scale must be positive")


PALETTES = {
    "default": {
        "background": "#e8e4d8",
        "asphalt": "#9a9a9a",
        "island": "#7da26b",
        "edge": "#5c5c5c",
        "divider": "#f5f5f5",
        "v1": "#1f4e9c",
        "v2": "#b02318",
        "impact": "#e0a800",
        "text": "#1a1a1a",
        "box_fill": "#ffffff",
        "box_edge": "#1a1a1a",
    },
    "print": {
        "background": "#ffffff",
        "asphalt": "#c8c8c8",
        "island": "#eeeeee",
        "edge": "#444444",
        "divider": "#ffffff",
        "v1": "#222222",
        "v2": "#666666",
        "impact": "#000000",
        "text": "#000000",
        "box_fill": "#ffffff",
        "box_edge": "#000000",
    },
}


def truncate_narrative(narrative: str, limit: int = NARRATIVE_LIMIT) -> str:
    """Cut a narrative to the info-box budget at a word boundary."""
    if len(narrative) <= limit:
        return narrative
    head = narrative[:limit]
    cut = head.rsplit(" ", 1)[0].rstrip()
    return cut if cut else head


def road_labels(template: GeometryTemplate) -> tuple[SceneLabel, ...]:
    radius = template.outer_radius + template.leg_length + ROAD_LABEL_CLEARANCE_FT
    labels = []
    for leg in sorted(template.legs, key=lambda l: l.bearing_deg):
        anchor = azimuth_unit(leg.bearing_deg) * radius
        labels.append(SceneLabel(leg.road_name, _q2(anchor[0]), _q2(anchor[1])))
    return tuple(labels)


def base_scene(template: GeometryTemplate) -> SceneGraph:
    """The empty diagram: roadway geometry and road names, no vehicles."""
    return SceneGraph(template=template, labels=road_labels(template))


def _clear_island(
    center: np.ndarray, heading: float, length: float, width: float, island_radius: float
) -> np.ndarray:
    # Push radially outward until the footprint no longer clips the island.
    while rect_origin_clearance(center, heading, length, width) < island_radius:
        norm = float(np.linalg.norm(center))
        if norm < 1.0:
            center = azimuth_unit(heading + 90.0) * 1.0
            continue
        center = center * ((norm + 0.5) / norm)
    return center


def _vehicle_label_anchor(
    own: VehicleGlyph, side: float, taken: list[tuple[float, float]]
) -> tuple[float, float]:
    center = np.array(own.center)
    candidates = [
        center + azimuth_unit(own.heading_deg + 90.0) * LABEL_OFFSET_FT * side,
        center - azimuth_unit(own.heading_deg + 90.0) * LABEL_OFFSET_FT * side,
        center + azimuth_unit(own.heading_deg) * LABEL_OFFSET_FT,
        center - azimuth_unit(own.heading_deg) * LABEL_OFFSET_FT,
    ]
    for candidate in candidates:
        if all(
            math.hypot(candidate[0] - tx, candidate[1] - ty) >= MIN_LABEL_SPACING_FT
            for tx, ty in taken
        ):
            return (_q2(candidate[0]), _q2(candidate[1]))
    return (_q2(candidates[0][0]), _q2(candidates[0][1]))


def build_scene(
    record: CrashRecord,
    template: GeometryTemplate,
    footprint: tuple[float, float] = (VEHICLE_LENGTH_FT, VEHICLE_WIDTH_FT),
) -> SceneGraph:
    """Build the deterministic reference diagram for a record.

    Trajectories follow the assigned lanes; the impact point is the
    closest approach of the two paths; each vehicle is posed so its
    reported damage zone touches the impact point (with a radial nudge if
    a footprint would clip the center island).
    """
    length, width = footprint
    v1, v2 = record.vehicles
    t1 = compute_trajectory(v1, template)
    t2 = compute_trajectory(v2, template)
    solution = compute_impact(t1, t2, v1.damage_code, v2.damage_code)
    impact = np.array(solution.point)

    glyphs: list[VehicleGlyph] = []
    for vehicle, pose in ((v1, solution.v1_pose), (v2, solution.v2_pose)):
        fx, fy = zone_centroid(vehicle.damage_code)
        offset = body_to_world((fx * length, fy * width), pose.heading_deg)
        center = _clear_island(
            impact - offset, pose.heading_deg, length, width, template.island_radius
        )
        marker = center + offset
        glyphs.append(
            VehicleGlyph(
                label=vehicle.label,
                x=_q2(center[0]),
                y=_q2(center[1]),
                heading_deg=_q2(pose.heading_deg % 360.0),
                length_ft=_q2(length),
                width_ft=_q2(width),
                marker_x=_q2(marker[0]),
                marker_y=_q2(marker[1]),
            )
        )
    for glyph in glyphs:
        if not point_in_roadway(glyph.center, template):
            raise InvalidRecord(
                f"glyph for {glyph.label} landed outside the roadway at {glyph.center}"
            )

    labels: list[SceneLabel] = []
    anchor_v1 = _vehicle_label_anchor(glyphs[0], side=1.0, taken=[])
    labels.append(SceneLabel("V1", *anchor_v1))
    anchor_v2 = _vehicle_label_anchor(glyphs[1], side=-1.0, taken=[anchor_v1])
    labels.append(SceneLabel("V2", *anchor_v2))
    labels.extend(road_labels(template))

    paths = tuple(
        ScenePath(
            label=vehicle.label,
            lane=traj.lane,
            points=tuple((_q2(p[0]), _q2(p[1])) for p in traj.points),
        )
        for vehicle, traj in ((v1, t1), (v2, t2))
    )

    info = InfoBox(
        collision_type=record.collision_type.display,
        v1_code=v1.damage_code,
        v2_code=v2.damage_code,
        narrative_summary=truncate_narrative(record.narrative),
    )

    return SceneGraph(
        template=template,
        vehicles=tuple(glyphs),
        paths=paths,
        impact=(_q2(impact[0]), _q2(impact[1])),
        info_box=info,
        labels=tuple(labels),
    )


# --- Scene <-> annotation dict ----------------------------------------------


def scene_to_dict(scene: SceneGraph) -> dict[str, Any]:
    return {
        "template": scene.template.to_json_dict(),
        "vehicles": [
            {
                "label": g.label,
                "x": g.x,
                "y": g.y,
                "heading_deg": g.heading_deg,
                "length_ft": g.length_ft,
                "width_ft": g.width_ft,
                "marker_x": g.marker_x,
                "marker_y": g.marker_y,
            }
            for g in scene.vehicles
        ],
        "paths": [
            {"label": p.label, "lane": p.lane, "points": [list(pt) for pt in p.points]}
            for p in scene.paths
        ],
        "impact": list(scene.impact) if scene.impact is not None else None,
        "info_box": (
            {
                "collision_type": scene.info_box.collision_type,
                "v1_code": scene.info_box.v1_code,
                "v2_code": scene.info_box.v2_code,
                "narrative_summary": scene.info_box.narrative_summary,
            }
            if scene.info_box is not None
            else None
        ),
        "labels": [{"text": l.text, "x": l.x, "y": l.y} for l in scene.labels],
    }


def scene_from_dict(doc: dict[str, Any]) -> SceneGraph:
    try:
        template = GeometryTemplate.from_json_dict(doc["template"])
        vehicles = tuple(
            VehicleGlyph(
                label=str(g["label"]),
                x=float(g["x"]),
                y=float(g["y"]),
                heading_deg=float(g["heading_deg"]),
                length_ft=float(g["length_ft"]),
                width_ft=float(g["width_ft"]),
                marker_x=float(g["marker_x"]),
                marker_y=float(g["marker_y"]),
            )
            for g in doc["vehicles"]
        )
        paths = tuple(
            ScenePath(
                label=str(p["label"]),
                lane=str(p["lane"]),
                points=tuple((float(pt[0]), float(pt[1])) for pt in p["points"]),
            )
            for p in doc["paths"]
        )
        impact = None if doc["impact"] is None else (float(doc["impact"][0]), float(doc["impact"][1]))
        box_doc = doc["info_box"]
        info = (
            None
            if box_doc is None
            else InfoBox(
                collision_type=str(box_doc["collision_type"]),
                v1_code=int(box_doc["v1_code"]),
                v2_code=int(box_doc["v2_code"]),
                narrative_summary=str(box_doc["narrative_summary"]),
            )
        )
        labels = tuple(
            SceneLabel(str(l["text"]), float(l["x"]), float(l["y"])) for l in doc["labels"]
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise MalformedAnnotation(f"bad scene annotation: {exc}") from exc
    return SceneGraph(
        template=template,
        vehicles=vehicles,
        paths=paths,
        impact=impact,
        info_box=info,
        labels=labels,
    )


def canonical_scene_json(scene: SceneGraph) -> str:
    return json.dumps(scene_to_dict(scene), sort_keys=True, separators=(",", ":"))


# --- SVG rendering ------------------------------------------------------------


def _fmt(value: float) -> str:
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


class _Canvas:
    def __init__(self, half_extent_ft: float, scale: float):
        self.half = half_extent_ft
        self.scale = scale

    def x(self, wx: float) -> float:
        return (wx + self.half) * self.scale

    def y(self, wy: float) -> float:
        return (self.half - wy) * self.scale

    def pt(self, wx: float, wy: float) -> str:
        return f"{_fmt(self.x(wx))},{_fmt(self.y(wy))}"

    @property
    def size(self) -> float:
        return 2.0 * self.half * self.scale


def _corridor_corners(template: GeometryTemplate, bearing: float) -> list[np.ndarray]:
    u = azimuth_unit(bearing)
    side = np.array([u[1], -u[0]])  # clockwise perpendicular
    half = template.entry_lane_width
    inner = template.outer_radius - template.lane_width / 2.0
    outer = template.outer_radius + template.leg_length
    return [
        u * inner + side * half,
        u * outer + side * half,
        u * outer - side * half,
        u * inner - side * half,
    ]


def _star_points(cx: float, cy: float, r_outer: float, canvas: _Canvas) -> str:
    pts = []
    for k in range(10):
        radius = r_outer if k % 2 == 0 else r_outer * 0.45
        angle = math.radians(36.0 * k)
        pts.append(canvas.pt(cx + radius * math.sin(angle), cy + radius * math.cos(angle)))
    return " ".join(pts)


def render_svg(scene: SceneGraph, options: RenderOptions | None = None) -> bytes:
    """Render a scene to SVG 1.1 bytes. Identical inputs yield identical
    bytes: element order, float formatting and styling are all fixed, and
    nothing environmental (time, locale) leaks in."""
    opts = options or RenderOptions()
    if opts.palette not in PALETTES:
        raise InvalidRecord(f"unknown palette: {opts.palette!r}")
    colors = PALETTES[opts.palette]
    template = scene.template
    canvas = _Canvas(template.outer_radius + template.leg_length + opts.margin_ft, opts.scale)
    size = _fmt(canvas.size)
    cx, cy = canvas.x(0.0), canvas.y(0.0)

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">'
    )
    if opts.embed_annotation:
        out.append(
            f'<metadata id="{ANNOTATION_ID}">{escape(canonical_scene_json(scene))}</metadata>'
        )
    out.append("<defs>")
    for label, color_key in (("v1", "v1"), ("v2", "v2")):
        out.append(
            f'<marker id="arrow-{label}" viewBox="0 0 10 10" refX="8" refY="5" '
            f'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
            f'<path d="M 0 0 L 10 5 L 0 10 z" fill="{colors[color_key]}"/></marker>'
        )
    out.append("</defs>")
    out.append(f'<rect x="0" y="0" width="{size}" height="{size}" fill="{colors["background"]}"/>')

    for leg in sorted(template.legs, key=lambda l: l.bearing_deg):
        corners = _corridor_corners(template, leg.bearing_deg)
        points = " ".join(canvas.pt(c[0], c[1]) for c in corners)
        out.append(f'<polygon class="leg-corridor" points="{points}" fill="{colors["asphalt"]}"/>')

    for lane_index in range(template.num_circulating_lanes):
        radius = template.island_radius + (lane_index + 0.5) * template.lane_width
        out.append(
            f'<circle class="lane-ring" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
            f'r="{_fmt(radius * opts.scale)}" fill="none" stroke="{colors["asphalt"]}" '
            f'stroke-width="{_fmt(template.lane_width * opts.scale)}"/>'
        )
    out.append(
        f'<circle class="island" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
        f'r="{_fmt(template.island_radius * opts.scale)}" fill="{colors["island"]}" '
        f'stroke="{colors["edge"]}" stroke-width="1.50"/>'
    )
    out.append(
        f'<circle class="lane-edge" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
        f'r="{_fmt(template.outer_radius * opts.scale)}" fill="none" '
        f'stroke="{colors["edge"]}" stroke-width="1.50"/>'
    )
    for divider_index in range(1, template.num_circulating_lanes):
        radius = template.island_radius + divider_index * template.lane_width
        out.append(
            f'<circle class="lane-divider" cx="{_fmt(cx)}" cy="{_fmt(cy)}" '
            f'r="{_fmt(radius * opts.scale)}" fill="none" stroke="{colors["divider"]}" '
            f'stroke-width="1.00" stroke-dasharray="8,6"/>'
        )

    for path in scene.paths:
        color = colors["v1"] if path.label == "V1" else colors["v2"]
        marker = path.label.lower()
        points = " ".join(canvas.pt(px, py) for px, py in path.points)
        out.append(
            f'<polyline class="trajectory trajectory-{marker}" points="{points}" fill="none" '
            f'stroke="{color}" stroke-width="2.00" stroke-opacity="0.85" '
            f'marker-start="url(#arrow-{marker})" marker-end="url(#arrow-{marker})"/>'
        )

    for glyph in scene.vehicles:
        color = colors["v1"] if glyph.label == "V1" else colors["v2"]
        gx, gy = canvas.x(glyph.x), canvas.y(glyph.y)
        half_l = glyph.length_ft / 2.0 * opts.scale
        half_w = glyph.width_ft / 2.0 * opts.scale
        # Screen rotation: compass heading 0 points up, so rotate by
        # (heading - 90) from the +x axis.
        out.append(
            f'<g class="vehicle vehicle-{glyph.label.lower()}" '
            f'transform="translate({_fmt(gx)},{_fmt(gy)}) rotate({_fmt((glyph.heading_deg - 90.0) % 360.0)})">'
            f'<rect x="{_fmt(-half_l)}" y="{_fmt(-half_w)}" width="{_fmt(2 * half_l)}" '
            f'height="{_fmt(2 * half_w)}" rx="{_fmt(0.3 * half_w)}" fill="{color}" '
            f'fill-opacity="0.90" stroke="{colors["edge"]}" stroke-width="1.00"/>'
            f'<circle cx="{_fmt(half_l * 0.7)}" cy="0.00" r="{_fmt(0.18 * half_l)}" '
            f'fill="{colors["background"]}" fill-opacity="0.60"/></g>'
        )
        out.append(
            f'<circle class="damage-marker damage-{glyph.label.lower()}" '
            f'cx="{_fmt(canvas.x(glyph.marker_x))}" cy="{_fmt(canvas.y(glyph.marker_y))}" '
            f'r="{_fmt(1.2 * opts.scale)}" fill="{colors["impact"]}" '
            f'stroke="{colors["edge"]}" stroke-width="0.80"/>'
        )

    if scene.impact is not None:
        out.append(
            f'<polygon class="impact-marker" '
            f'points="{_star_points(scene.impact[0], scene.impact[1], 4.5, canvas)}" '
            f'fill="{colors["impact"]}" stroke="{colors["edge"]}" stroke-width="1.00"/>'
        )

    font_px = 3.2 * opts.scale
    for label in scene.labels:
        out.append(
            f'<text class="scene-label" x="{_fmt(canvas.x(label.x))}" '
            f'y="{_fmt(canvas.y(label.y))}" font-family="sans-serif" '
            f'font-size="{_fmt(font_px)}" font-weight="bold" fill="{colors["text"]}" '
            f'text-anchor="middle" dominant-baseline="middle">{escape(label.text)}</text>'
        )

    if scene.info_box is not None:
        box = scene.info_box
        lines = [
            f"Collision Type: {box.collision_type}",
            f"V1 Damage Code: {box.v1_code}",
            f"V2 Damage Code: {box.v2_code}",
            "Narrative Summary:",
        ]
        lines.extend(textwrap.wrap(box.narrative_summary, width=56)[:6])
        text_px = 2.6 * opts.scale
        pad = 2.0 * opts.scale
        line_height = text_px * 1.35
        box_w = 60.0 * opts.scale
        box_h = pad * 2 + line_height * len(lines)
        bx = pad
        by = canvas.size - pad - box_h
        out.append(
            f'<g class="info-box"><rect x="{_fmt(bx)}" y="{_fmt(by)}" width="{_fmt(box_w)}" '
            f'height="{_fmt(box_h)}" fill="{colors["box_fill"]}" fill-opacity="0.92" '
            f'stroke="{colors["box_edge"]}" stroke-width="1.50"/>'
        )
        for i, line in enumerate(lines):
            ty = by + pad + line_height * (i + 0.8)
            out.append(
                f'<text class="info-box-line" x="{_fmt(bx + pad)}" y="{_fmt(ty)}" '
                f'font-family="sans-serif" font-size="{_fmt(text_px)}" '
                f'fill="{colors["text"]}">{escape(line)}</text>'
            )
        out.append("</g>")

    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def parse_scene(data: bytes | str) -> SceneGraph:
    """Recover the SceneGraph embedded in an SVG by render_svg.

    Raster bytes or foreign SVGs raise MissingAnnotation — the signal that
    an output can only be scored through the human channel.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MissingAnnotation("not a text document") from exc
    else:
        text = data
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MissingAnnotation(f"not an SVG document: {exc}") from exc
    node = None
    for element in root.iter():
        if element.get("id") == ANNOTATION_ID:
            node = element
            break
    if node is None:
        raise MissingAnnotation("no embedded scene annotation")
    payload = (node.text or "").strip()
    if not payload:
        raise MalformedAnnotation("annotation element is empty")
    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise MalformedAnnotation(f"annotation is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedAnnotation("annotation must be a JSON object")
    return scene_from_dict(doc)
