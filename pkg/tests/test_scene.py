from __future__ import annotations

import math
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crashviz.errors import MalformedAnnotation, MissingAnnotation, NonLocalizedCode
from crashviz.geometry import rect_origin_clearance, standard_template
from crashviz.records import COLLISION_KINDS, COMPASS_POSITIONS
from crashviz.scene import (
    RenderOptions,
    base_scene,
    build_scene,
    parse_scene,
    render_svg,
    truncate_narrative,
)

from conftest import make_record


class TestBuildScene:
    def test_fixture_scene_structure(self, template):
        scene = build_scene(make_record(), template)
        assert len(scene.vehicles) == 2
        assert scene.impact is not None
        assert scene.info_box is not None
        assert scene.info_box.v1_code == 2
        assert scene.info_box.v2_code == 9
        assert scene.info_box.collision_type == "Right Angle"
        texts = [l.text for l in scene.labels]
        assert "V1" in texts and "V2" in texts

    def test_narrative_carried_into_info_box(self, template):
        narrative = (
            "V1 entered the roundabout from Dunning Street (eastbound) and failed "
            "to yield to V2"
        )
        scene = build_scene(make_record(narrative=narrative), template)
        assert narrative in scene.info_box.narrative_summary

    def test_non_localized_code_propagates(self, template):
        with pytest.raises(NonLocalizedCode):
            build_scene(make_record(v1=("East", "North", 15)), template)

    def test_labels_near_their_glyphs(self, template):
        scene = build_scene(make_record(), template)
        for label in ("V1", "V2"):
            glyph = scene.glyph(label)
            anchor = next(l for l in scene.labels if l.text == label)
            assert math.dist(anchor.anchor, glyph.center) <= 10.0

    def test_damage_marker_rides_the_coded_zone(self, template):
        scene = build_scene(make_record(v1=("East", "North", 2)), template)
        glyph = scene.glyph("V1")
        # Front-center code: marker sits half a length ahead of center.
        dist = math.dist(glyph.marker, glyph.center)
        assert dist == pytest.approx(glyph.length_ft / 2, abs=0.05)

    def test_truncation_at_word_boundary(self):
        text = "word " * 100
        cut = truncate_narrative(text.strip())
        assert len(cut) <= 280
        assert not cut.endswith(" ")
        assert cut == ("word " * 55 + "word").strip()[: len(cut)]

    def test_short_narrative_untouched(self):
        assert truncate_narrative("short") == "short"


class TestRenderDeterminism:
    def test_identical_bytes(self, template):
        scene = build_scene(make_record(), template)
        assert render_svg(scene) == render_svg(scene)

    def test_base_scene_rings_and_corridors(self, template):
        svg = render_svg(base_scene(template)).decode("utf-8")
        assert svg.count('class="lane-ring"') == 2
        assert svg.count('class="leg-corridor"') == 4

    def test_two_decimal_formatting(self, template):
        svg = render_svg(build_scene(make_record(), template)).decode("utf-8")
        for match in re.finditer(r'(?:x|y|cx|cy|r)="(-?\d+\.\d+)"', svg):
            decimals = match.group(1).split(".")[1]
            assert len(decimals) == 2
        assert "-0.00" not in svg

    def test_annotation_can_be_disabled(self, template):
        scene = base_scene(template)
        svg = render_svg(scene, RenderOptions(embed_annotation=False))
        assert b"crashviz-scene" not in svg
        with pytest.raises(MissingAnnotation):
            parse_scene(svg)


class TestParseScene:
    def test_round_trip(self, template):
        scene = build_scene(make_record(), template)
        assert parse_scene(render_svg(scene)) == scene

    def test_base_scene_round_trip(self, template):
        scene = base_scene(template)
        assert parse_scene(render_svg(scene)) == scene

    def test_png_bytes_missing_annotation(self):
        png = b"\x89PNG\r\n\x1a\n" + b"\x00" * 64
        with pytest.raises(MissingAnnotation):
            parse_scene(png)

    def test_foreign_svg_missing_annotation(self):
        with pytest.raises(MissingAnnotation):
            parse_scene(b'<svg xmlns="http://www.w3.org/2000/svg"><rect/></svg>')

    def test_truncated_annotation_malformed(self, template):
        svg = render_svg(build_scene(make_record(), template)).decode("utf-8")
        broken = re.sub(
            r'(<metadata id="crashviz-scene">).{40}',
            r"\1",
            svg,
            count=1,
        )
        with pytest.raises(MalformedAnnotation):
            parse_scene(broken.encode("utf-8"))


# --- scene properties over generated records ---------------------------------

_scene_records = st.builds(
    lambda e1, x1, c1, e2, x2, c2, kind, narrative: make_record(
        v1=(e1, x1, c1), v2=(e2, x2, c2), collision=kind, narrative=narrative
    ),
    e1=st.sampled_from(COMPASS_POSITIONS),
    x1=st.sampled_from(COMPASS_POSITIONS),
    c1=st.integers(min_value=1, max_value=13),
    e2=st.sampled_from(COMPASS_POSITIONS),
    x2=st.sampled_from(COMPASS_POSITIONS),
    c2=st.integers(min_value=1, max_value=13),
    kind=st.sampled_from(COLLISION_KINDS),
    narrative=st.text(
        alphabet=st.characters(blacklist_categories=("Cs",), min_codepoint=32),
        min_size=1,
        max_size=400,
    ).filter(lambda s: s.strip()),
)


@settings(max_examples=120, deadline=None)
@given(_scene_records)
def test_render_parse_identity_property(record):
    template = standard_template()
    scene = build_scene(record, template)
    assert parse_scene(render_svg(scene)) == scene


@settings(max_examples=120, deadline=None)
@given(_scene_records)
def test_island_disjointness_property(record):
    template = standard_template()
    scene = build_scene(record, template)
    for glyph in scene.vehicles:
        clearance = rect_origin_clearance(
            glyph.center, glyph.heading_deg, glyph.length_ft, glyph.width_ft
        )
        assert clearance >= template.island_radius - 1e-6
