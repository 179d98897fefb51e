"""Parameterized two-lane roundabout geometry.

Plan-view coordinates: origin at the roundabout center, +y North, +x East,
distances in feet. Compass azimuths are degrees clockwise from North
(N=0, E=90, S=180, W=270). Circulation is counterclockwise (right-hand
traffic), so compass azimuth decreases along the direction of travel.

Leg positions name the compass placement of the leg itself: the "East"
leg is the approach that meets the circle at azimuth 90, regardless of
which way its traffic heads.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .errors import InvalidRecord, NonLocalizedCode, UnsupportedCode
from .records import (
    COMPASS_POSITIONS,
    DEFAULT_ROAD_NAMES,
    VehicleRecord,
    is_localized_code,
)

LEG_BEARINGS = {"North": 0.0, "East": 90.0, "South": 180.0, "West": 270.0}

RIGHT_TURN = "right_turn"
THROUGH = "through"
LEFT_TURN = "left_turn"
U_TURN = "u_turn"
MOVEMENTS = (RIGHT_TURN, THROUGH, LEFT_TURN, U_TURN)

INNER = "inner"
OUTER = "outer"

#: Default vehicle footprint (length, width) in feet, used for glyph and
#: body-zone geometry.
VEHICLE_LENGTH_FT = 15.0
VEHICLE_WIDTH_FT = 6.0

#: Circular arcs are sampled on an absolute azimuth grid (multiples of
#: this step) rather than per-arc, so overlapping arcs on the same radius
#: share exact sample points. 2 degrees at the outer centerline is ~2.6 ft,
#: comfortably under the 5 ft smoothness bound.
ARC_STEP_DEG = 2.0

#: Straight trajectory pieces are resampled to at most this spacing (ft).
SEGMENT_STEP_FT = 4.0


def azimuth_unit(deg: float) -> np.ndarray:
    """Unit vector pointing outward at a compass azimuth."""
    rad = math.radians(deg)
    return np.array([math.sin(rad), math.cos(rad)])


def azimuth_of(point: Iterable[float]) -> float:
    """Compass azimuth of a point as seen from the origin, in [0, 360)."""
    x, y = float(point[0]), float(point[1])
    return math.degrees(math.atan2(x, y)) % 360.0


def heading_vector(heading_deg: float) -> np.ndarray:
    return azimuth_unit(heading_deg)


def heading_of(vec: Iterable[float]) -> float:
    return azimuth_of(vec)


def body_to_world(offset_xy: Iterable[float], heading_deg: float) -> np.ndarray:
    """Rotate a body-frame offset (+x forward, +y left) into world axes."""
    fwd = heading_vector(heading_deg)
    left = np.array([-fwd[1], fwd[0]])  # 90 deg counterclockwise in world
    return float(offset_xy[0]) * fwd + float(offset_xy[1]) * left


def world_to_body(vec_xy: Iterable[float], heading_deg: float) -> np.ndarray:
    fwd = heading_vector(heading_deg)
    left = np.array([-fwd[1], fwd[0]])
    v = np.asarray(vec_xy, dtype=float)
    return np.array([float(v @ fwd), float(v @ left)])


@dataclass(frozen=True)
class ApproachLeg:
    """One named leg of the roundabout, fixed at a cardinal bearing."""

    position: str
    road_name: str
    bearing_deg: float

    def __post_init__(self) -> None:
        if self.position not in COMPASS_POSITIONS:
            raise InvalidRecord(f"unknown leg position: {self.position!r}")


@dataclass(frozen=True)
class GeometryTemplate:
    """Two-lane roundabout dimensions plus four named approach legs."""

    island_radius: float
    lane_width: float
    num_circulating_lanes: int
    legs: tuple[ApproachLeg, ApproachLeg, ApproachLeg, ApproachLeg]
    leg_length: float
    entry_lane_width: float

    def __post_init__(self) -> None:
        if self.island_radius <= 0 or self.lane_width <= 0:
            raise InvalidRecord("radii and lane widths must be positive")
        if self.num_circulating_lanes < 1:
            raise InvalidRecord("at least one circulating lane required")
        positions = [leg.position for leg in self.legs]
        if sorted(positions) != sorted(COMPASS_POSITIONS):
            raise InvalidRecord("template requires one leg per compass position")
        bearings = {leg.bearing_deg for leg in self.legs}
        if bearings != set(LEG_BEARINGS.values()):
            raise InvalidRecord("leg bearings must be the four cardinal values")

    @property
    def outer_radius(self) -> float:
        return self.island_radius + self.num_circulating_lanes * self.lane_width

    def lane_center_radius(self, lane: str) -> float:
        if lane == INNER:
            return self.island_radius + self.lane_width / 2.0
        if lane == OUTER:
            return self.outer_radius - self.lane_width / 2.0
        raise InvalidRecord(f"unknown lane: {lane!r}")

    def leg(self, position: str) -> ApproachLeg:
        for leg in self.legs:
            if leg.position == position:
                return leg
        raise KeyError(position)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "island_radius_ft": self.island_radius,
            "lane_width_ft": self.lane_width,
            "lanes": self.num_circulating_lanes,
            "legs": [
                {
                    "position": leg.position,
                    "road_name": leg.road_name,
                    "bearing_deg": leg.bearing_deg,
                }
                for leg in sorted(self.legs, key=lambda l: l.bearing_deg)
            ],
            "leg_length_ft": self.leg_length,
            "entry_lane_width_ft": self.entry_lane_width,
        }

    @classmethod
    def from_json_dict(cls, doc: dict[str, Any]) -> "GeometryTemplate":
        legs = tuple(
            ApproachLeg(l["position"], l["road_name"], float(l["bearing_deg"]))
            for l in doc["legs"]
        )
        if len(legs) != 4:
            raise InvalidRecord("template requires exactly four legs")
        return cls(
            island_radius=float(doc["island_radius_ft"]),
            lane_width=float(doc["lane_width_ft"]),
            num_circulating_lanes=int(doc["lanes"]),
            legs=legs,  # type: ignore[arg-type]
            leg_length=float(doc["leg_length_ft"]),
            entry_lane_width=float(doc["entry_lane_width_ft"]),
        )

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def standard_template() -> GeometryTemplate:
    """The study-site template: 165 ft inscribed circle, 105 ft island,
    two 15 ft circulating lanes, default road names on all four legs."""
    legs = tuple(
        ApproachLeg(pos, DEFAULT_ROAD_NAMES[pos], LEG_BEARINGS[pos])
        for pos in COMPASS_POSITIONS
    )
    return GeometryTemplate(
        island_radius=52.5,
        lane_width=15.0,
        num_circulating_lanes=2,
        legs=legs,  # type: ignore[arg-type]
        leg_length=100.0,
        entry_lane_width=12.5,
    )


def ccw_span_deg(entry_bearing: float, exit_bearing: float) -> float:
    """Counterclockwise azimuth distance from entry to exit; same leg = 360."""
    span = (entry_bearing - exit_bearing) % 360.0
    return 360.0 if span == 0.0 else span


def classify_movement(entry: str, exit: str) -> str:
    """Classify a movement by how many exits are passed counterclockwise."""
    span = ccw_span_deg(LEG_BEARINGS[entry], LEG_BEARINGS[exit])
    return {90.0: RIGHT_TURN, 180.0: THROUGH, 270.0: LEFT_TURN, 360.0: U_TURN}[span]


def assign_lane(movement: str) -> str:
    """Lane discipline: left and U turns run the inner lane, the rest outer."""
    if movement in (LEFT_TURN, U_TURN):
        return INNER
    if movement in (RIGHT_TURN, THROUGH):
        return OUTER
    raise InvalidRecord(f"unknown movement: {movement!r}")


@dataclass(eq=False)
class Trajectory:
    """Densified polyline for one vehicle: approach, circulating arc, exit.

    ``points`` is an (N, 2) array; ``headings`` holds the compass tangent
    direction at each point. The circulating arc occupies indices
    [circ_start, circ_end).
    """

    points: np.ndarray
    headings: np.ndarray
    lane: str
    circ_start: int
    circ_end: int

    @property
    def circulating_points(self) -> np.ndarray:
        return self.points[self.circ_start : self.circ_end]


def sample_arc(radius: float, az_start: float, ccw_span: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample a counterclockwise arc on the absolute azimuth grid.

    Returns (points, headings). Endpoints are always included; interior
    samples land on multiples of ARC_STEP_DEG so arcs that share a radius
    share exact coordinates wherever they overlap.
    """
    az_end = az_start - ccw_span
    azimuths = [az_start]
    grid = math.floor(az_start / ARC_STEP_DEG) * ARC_STEP_DEG
    if grid == az_start:
        grid -= ARC_STEP_DEG
    while grid > az_end:
        azimuths.append(grid)
        grid -= ARC_STEP_DEG
    azimuths.append(az_end)
    pts = np.array([radius * azimuth_unit(a % 360.0) for a in azimuths])
    headings = np.array([(a - 90.0) % 360.0 for a in azimuths])
    return pts, headings


def _resample_segment(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    length = float(np.linalg.norm(p1 - p0))
    n = max(1, math.ceil(length / SEGMENT_STEP_FT))
    ts = np.linspace(0.0, 1.0, n + 1)[:, None]
    return p0[None, :] * (1.0 - ts) + p1[None, :] * ts


def _append(points: list[np.ndarray], headings: list[float], pts: np.ndarray, hdgs) -> None:
    scalar = isinstance(hdgs, float)
    for i in range(len(pts)):
        h = hdgs if scalar else float(hdgs[i])
        if points and float(np.linalg.norm(pts[i] - points[-1])) < 1e-9:
            headings[-1] = h  # joint point: keep the downstream heading
            continue
        points.append(np.asarray(pts[i], dtype=float))
        headings.append(h)


def compute_trajectory(vehicle: VehicleRecord, template: GeometryTemplate) -> Trajectory:
    """Construct the vehicle's path: entry leg segment, counterclockwise
    arc along the assigned lane centerline from entry azimuth to exit
    azimuth, then the exit leg segment.

    Straight approach pieces ride the right half of their leg (offset by
    half the entry lane width); short straight connectors join them to the
    arc at the yield line.
    """
    entry_b = LEG_BEARINGS[vehicle.entry_leg]
    exit_b = LEG_BEARINGS[vehicle.exit_leg]
    movement = classify_movement(vehicle.entry_leg, vehicle.exit_leg)
    lane = assign_lane(movement)
    r_lane = template.lane_center_radius(lane)
    r_out = template.outer_radius
    half_lane = template.entry_lane_width / 2.0

    u_in = azimuth_unit(entry_b)
    u_out = azimuth_unit(exit_b)
    # Right-hand side of travel: inbound heading points at the center, so
    # the inbound lane sits at heading+90; symmetrically for outbound.
    off_in = azimuth_unit((entry_b + 180.0 + 90.0) % 360.0) * half_lane
    off_out = azimuth_unit((exit_b + 90.0) % 360.0) * half_lane

    points: list[np.ndarray] = []
    headings: list[float] = []

    heading_in = (entry_b + 180.0) % 360.0
    approach = _resample_segment(u_in * (r_out + template.leg_length) + off_in, u_in * r_out + off_in)
    _append(points, headings, approach, heading_in)

    arc_start = u_in * r_lane
    connector_in = _resample_segment(u_in * r_out + off_in, arc_start)
    _append(points, headings, connector_in, heading_of(arc_start - (u_in * r_out + off_in)))

    circ_start = len(points) - 1  # arc starts at the connector's end point
    arc_pts, arc_hdgs = sample_arc(r_lane, entry_b, ccw_span_deg(entry_b, exit_b))
    _append(points, headings, arc_pts, arc_hdgs)
    circ_end = len(points)

    arc_end = u_out * r_lane
    exit_gate = u_out * r_out + off_out
    connector_out = _resample_segment(arc_end, exit_gate)
    _append(points, headings, connector_out, heading_of(exit_gate - arc_end))

    heading_out = exit_b
    leg_end = u_out * (r_out + template.leg_length) + off_out
    _append(points, headings, _resample_segment(exit_gate, leg_end), heading_out)

    return Trajectory(
        points=np.array(points),
        headings=np.array(headings),
        lane=lane,
        circ_start=circ_start,
        circ_end=circ_end,
    )


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading_deg: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class ImpactSolution:
    """Closest approach between two trajectories.

    ``point`` is the midpoint of the globally closest point pair (earliest
    along the first trajectory on ties); contact vectors are unit vectors
    from each vehicle center toward the point, in that vehicle's body
    frame (+x forward, +y left). ``residual`` is the minimum separation.
    """

    point: tuple[float, float]
    v1_pose: Pose
    v2_pose: Pose
    contact_vector_v1: tuple[float, float]
    contact_vector_v2: tuple[float, float]
    residual: float


def _contact_vector(center: np.ndarray, point: np.ndarray, heading: float) -> tuple[float, float]:
    body = world_to_body(point - center, heading)
    norm = float(np.linalg.norm(body))
    if norm < 1e-9:
        return (1.0, 0.0)  # coincident: fall back to straight ahead
    return (float(body[0] / norm), float(body[1] / norm))


def compute_impact(
    t1: Trajectory, t2: Trajectory, c1: int, c2: int
) -> ImpactSolution:
    """Solve for the impact point implied by two trajectories.

    Both damage codes must be localized (1..13); codes 14..19 carry no
    body zone to align, so the solver refuses them.
    """
    for code in (c1, c2):
        if not is_localized_code(code):
            raise NonLocalizedCode(f"damage code {code} has no body zone")
    diff = t1.points[:, None, :] - t2.points[None, :, :]
    distances = np.sqrt(np.sum(diff * diff, axis=2))
    flat = int(np.argmin(distances))  # row-major: earliest along t1, then t2
    i, j = divmod(flat, distances.shape[1])
    p1 = t1.points[i]
    p2 = t2.points[j]
    point = (p1 + p2) / 2.0
    h1 = float(t1.headings[i])
    h2 = float(t2.headings[j])
    return ImpactSolution(
        point=(float(point[0]), float(point[1])),
        v1_pose=Pose(float(p1[0]), float(p1[1]), h1),
        v2_pose=Pose(float(p2[0]), float(p2[1]), h2),
        contact_vector_v1=_contact_vector(p1, point, h1),
        contact_vector_v2=_contact_vector(p2, point, h2),
        residual=float(distances[i, j]),
    )


# --- Vehicle body zones -----------------------------------------------------
#
# Body frame: +x forward, +y left, both as fractions of vehicle length and
# width (the footprint spans [-0.5, 0.5] on each axis). The twelve
# perimeter zones tile the band between the footprint edge and an interior
# rectangle; zone 13 is that interior. Anchor points sit on the footprint
# edge at the spot the zone names (front center, mid right side, ...).

_X_INNER = 0.35  # front/rear band depth = 0.15 of length
_Y_INNER = 0.30  # side band depth = 0.20 of width
_SIDE_THIRD = (2 * _X_INNER) / 3.0

#: code -> (x0, x1, y0, y1) cell in body-frame fractions.
ZONE_CELLS: dict[int, tuple[float, float, float, float]] = {
    1: (_X_INNER, 0.5, _Y_INNER, 0.5),
    2: (_X_INNER, 0.5, -_Y_INNER, _Y_INNER),
    3: (_X_INNER, 0.5, -0.5, -_Y_INNER),
    4: (_X_INNER - _SIDE_THIRD, _X_INNER, -0.5, -_Y_INNER),
    5: (-(_X_INNER - _SIDE_THIRD), _X_INNER - _SIDE_THIRD, -0.5, -_Y_INNER),
    6: (-_X_INNER, -(_X_INNER - _SIDE_THIRD), -0.5, -_Y_INNER),
    7: (-0.5, -_X_INNER, -0.5, -_Y_INNER),
    8: (-0.5, -_X_INNER, -_Y_INNER, _Y_INNER),
    9: (-0.5, -_X_INNER, _Y_INNER, 0.5),
    10: (-_X_INNER, -(_X_INNER - _SIDE_THIRD), _Y_INNER, 0.5),
    11: (-(_X_INNER - _SIDE_THIRD), _X_INNER - _SIDE_THIRD, _Y_INNER, 0.5),
    12: (_X_INNER - _SIDE_THIRD, _X_INNER, _Y_INNER, 0.5),
    13: (-_X_INNER, _X_INNER, -_Y_INNER, _Y_INNER),
}

#: code -> anchor point on the footprint edge (zone 13: center).
ZONE_ANCHORS: dict[int, tuple[float, float]] = {
    1: (0.5, 0.5),
    2: (0.5, 0.0),
    3: (0.5, -0.5),
    4: (0.25, -0.5),
    5: (0.0, -0.5),
    6: (-0.25, -0.5),
    7: (-0.5, -0.5),
    8: (-0.5, 0.0),
    9: (-0.5, 0.5),
    10: (-0.25, 0.5),
    11: (0.0, 0.5),
    12: (0.25, 0.5),
    13: (0.0, 0.0),
}


def zone_centroid(code: int) -> tuple[float, float]:
    """Body-frame anchor point for a localized damage code."""
    if not is_localized_code(code):
        raise UnsupportedCode(f"damage code {code} has no body zone")
    return ZONE_ANCHORS[code]


def zone_polygon(code: int) -> tuple[tuple[float, float], ...]:
    """Corner points of the zone's cell, counterclockwise."""
    if not is_localized_code(code):
        raise UnsupportedCode(f"damage code {code} has no body zone")
    x0, x1, y0, y1 = ZONE_CELLS[code]
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


def quadrant_of(point: Iterable[float], template: GeometryTemplate) -> str:
    """Locate a point: an approach-leg name when it sits out along a leg
    corridor, otherwise the compass quadrant (NE, SE, SW, NW) by azimuth
    with half-open boundaries."""
    p = np.asarray(tuple(point), dtype=float)
    r = float(np.linalg.norm(p))
    if r > template.outer_radius:
        for leg in sorted(template.legs, key=lambda l: l.bearing_deg):
            u = azimuth_unit(leg.bearing_deg)
            s = float(p @ u)
            d = float(np.linalg.norm(p - s * u))
            if s > 0 and d <= template.entry_lane_width:
                return leg.position
    az = azimuth_of(p)
    if az < 90.0:
        return "NE"
    if az < 180.0:
        return "SE"
    if az < 270.0:
        return "SW"
    return "NW"


def point_in_roadway(point: Iterable[float], template: GeometryTemplate) -> bool:
    """True when a point lies in the circulating annulus or out along an
    approach corridor (never the island)."""
    p = np.asarray(tuple(point), dtype=float)
    r = float(np.linalg.norm(p))
    if template.island_radius < r < template.outer_radius:
        return True
    corridor_floor = template.outer_radius - template.lane_width
    for leg in template.legs:
        u = azimuth_unit(leg.bearing_deg)
        s = float(p @ u)
        d = float(np.linalg.norm(p - s * u))
        if s >= corridor_floor and d <= template.entry_lane_width:
            return True
    return False


def rect_origin_clearance(
    center: Iterable[float], heading_deg: float, length: float, width: float
) -> float:
    """Distance from the origin to an oriented rectangle (0 if inside)."""
    o = world_to_body(-np.asarray(tuple(center), dtype=float), heading_deg)
    dx = max(abs(float(o[0])) - length / 2.0, 0.0)
    dy = max(abs(float(o[1])) - width / 2.0, 0.0)
    return math.hypot(dx, dy)
