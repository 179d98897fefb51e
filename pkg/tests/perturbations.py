"""Targeted scene corruptions: each one is designed to flip exactly its
metric when the corrupted scene is auto-scored against the intact record.

Shared between the evaluator unit tests and the acceptance suite.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from crashviz.evaluation import MetricId
from crashviz.geometry import (
    GeometryTemplate,
    azimuth_unit,
    body_to_world,
    quadrant_of,
    zone_centroid,
)
from crashviz.records import COLLISION_KINDS, CrashRecord
from crashviz.scene import SceneGraph

#: Metrics where the designated corruption may legitimately flip a second
#: metric: a quadrant-crossing displacement is also a large displacement.
ALLOWED_COFLIPS = {MetricId.COLLISION_LOCATION: {MetricId.COLLISION_POINT_ACCURACY}}


def _wrong_collision_type(scene: SceneGraph) -> SceneGraph:
    current = scene.info_box.collision_type
    replacement = next(k for k in COLLISION_KINDS if k != current)
    box = dataclasses.replace(scene.info_box, collision_type=replacement)
    return dataclasses.replace(scene, info_box=box)


def _drop_label(scene: SceneGraph, text: str) -> SceneGraph:
    labels = tuple(l for l in scene.labels if l.text != text)
    return dataclasses.replace(scene, labels=labels)


def _rotate_impact(scene: SceneGraph) -> SceneGraph:
    x, y = scene.impact
    radius = math.hypot(x, y)
    azimuth = math.degrees(math.atan2(x, y)) + 90.0
    moved = azimuth_unit(azimuth) * radius
    return dataclasses.replace(scene, impact=(round(moved[0], 2), round(moved[1], 2)))


def _shift_impact_within_region(scene: SceneGraph, template: GeometryTemplate) -> SceneGraph:
    """Move the impact by a bit more than the point tolerance while keeping
    quadrant_of unchanged (metric 5 must flip alone)."""
    ref = np.array(scene.impact)
    region = quadrant_of(ref, template)
    shift = 8.0
    if region not in {"NE", "SE", "SW", "NW"}:
        bearing = {"North": 0.0, "East": 90.0, "South": 180.0, "West": 270.0}[region]
        candidates = [azimuth_unit(bearing) * shift]
    else:
        radius = float(np.linalg.norm(ref))
        radial = ref / radius
        tangent = np.array([-radial[1], radial[0]])
        candidates = [-radial * shift, radial * shift, tangent * shift, -tangent * shift]
    for delta in candidates:
        moved = ref + delta
        if quadrant_of(moved, template) == region:
            return dataclasses.replace(
                scene, impact=(round(float(moved[0]), 2), round(float(moved[1]), 2))
            )
    raise AssertionError(f"no quadrant-preserving shift found at {tuple(ref)} ({region})")


def _wrong_code(scene: SceneGraph, which: str) -> SceneGraph:
    box = scene.info_box
    if which == "v1":
        box = dataclasses.replace(box, v1_code=box.v1_code % 13 + 1)
    else:
        box = dataclasses.replace(box, v2_code=box.v2_code % 13 + 1)
    return dataclasses.replace(scene, info_box=box)


def _misplace_marker(scene: SceneGraph, truth: CrashRecord, label: str) -> SceneGraph:
    glyph = scene.glyph(label)
    code = truth.vehicle(label).damage_code
    if code == 13:
        offset_body = (0.5 * glyph.length_ft, 0.0)  # push an interior code to the rim
    else:
        fx, fy = zone_centroid(code)
        offset_body = (-fx * glyph.length_ft, -fy * glyph.width_ft)  # opposite zone
    offset = body_to_world(offset_body, glyph.heading_deg)
    moved = dataclasses.replace(
        glyph,
        marker_x=round(glyph.x + float(offset[0]), 2),
        marker_y=round(glyph.y + float(offset[1]), 2),
    )
    vehicles = tuple(moved if g.label == label else g for g in scene.vehicles)
    return dataclasses.replace(scene, vehicles=vehicles)


def _distort_proportions(scene: SceneGraph) -> SceneGraph:
    template = dataclasses.replace(
        scene.template, island_radius=scene.template.island_radius * 1.25
    )
    return dataclasses.replace(scene, template=template)


def corrupt(
    scene: SceneGraph, truth: CrashRecord, template: GeometryTemplate, metric: MetricId
) -> SceneGraph:
    if metric is MetricId.COLLISION_TYPE_EXTRACTION:
        return _wrong_collision_type(scene)
    if metric is MetricId.LABEL_V1:
        return _drop_label(scene, "V1")
    if metric is MetricId.LABEL_V2:
        return _drop_label(scene, "V2")
    if metric is MetricId.COLLISION_LOCATION:
        return _rotate_impact(scene)
    if metric is MetricId.COLLISION_POINT_ACCURACY:
        return _shift_impact_within_region(scene, template)
    if metric is MetricId.V1_CODE_EXTRACTION:
        return _wrong_code(scene, "v1")
    if metric is MetricId.V2_CODE_EXTRACTION:
        return _wrong_code(scene, "v2")
    if metric is MetricId.V1_CODE_VISUAL:
        return _misplace_marker(scene, truth, "V1")
    if metric is MetricId.V2_CODE_VISUAL:
        return _misplace_marker(scene, truth, "V2")
    if metric is MetricId.CLARITY_PROPORTION:
        return _distort_proportions(scene)
    raise AssertionError(metric)
