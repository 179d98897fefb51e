"""crashviz: roundabout crash diagram toolkit.

Turns structured two-vehicle crash records into standardized diagrams,
builds the fixed three-section prompt bundle for image-generation
backends, scores diagrams on the ten-metric binary rubric, and aggregates
multi-model benchmark reports.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .backends import (
    BackendConfig,
    GenerationResult,
    ResponseCache,
    generate,
    mock_config,
    mock_generate,
)
from .benchmark import BenchmarkReport, aggregate, render_report
from .errors import CrashvizError
from .evaluation import (
    ConsensusSheet,
    MetricId,
    ScoreSheet,
    Tolerances,
    evaluate_auto,
    ingest_sheets,
    merge_ratings,
)
from .geometry import (
    ApproachLeg,
    GeometryTemplate,
    ImpactSolution,
    Trajectory,
    assign_lane,
    classify_movement,
    compute_impact,
    compute_trajectory,
    quadrant_of,
    standard_template,
    zone_centroid,
)
from .pipeline import RunManifest, run_batch, run_case
from .prompt import PromptBundle, build_prompt, prompt_fingerprint
from .records import (
    CollisionType,
    CrashRecord,
    ValidationReport,
    VehicleRecord,
    damage_code_description,
    parse_record,
    serialize_record,
    validate_record,
)
from .scene import (
    RenderOptions,
    SceneGraph,
    base_scene,
    build_scene,
    parse_scene,
    render_svg,
)
from .store import CaseStore

__all__ = [
    "ApproachLeg",
    "BackendConfig",
    "BenchmarkReport",
    "CaseStore",
    "CollisionType",
    "ConsensusSheet",
    "CrashRecord",
    "CrashvizError",
    "GenerationResult",
    "GeometryTemplate",
    "ImpactSolution",
    "MetricId",
    "PromptBundle",
    "ResponseCache",
    "RenderOptions",
    "RunManifest",
    "SceneGraph",
    "ScoreSheet",
    "Tolerances",
    "Trajectory",
    "ValidationReport",
    "VehicleRecord",
    "aggregate",
    "assign_lane",
    "base_scene",
    "build_prompt",
    "build_scene",
    "classify_movement",
    "compute_impact",
    "compute_trajectory",
    "damage_code_description",
    "evaluate_auto",
    "generate",
    "ingest_sheets",
    "merge_ratings",
    "mock_config",
    "mock_generate",
    "parse_record",
    "parse_scene",
    "prompt_fingerprint",
    "quadrant_of",
    "render_report",
    "render_svg",
    "run_batch",
    "run_case",
    "serialize_record",
    "standard_template",
    "validate_record",
    "zone_centroid",
]
