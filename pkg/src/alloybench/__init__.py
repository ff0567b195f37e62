"""Benchmark engine for structured experiment extraction from alloy papers.

Documents describe synthesized materials as process-defined entities with
measurements; this package parses them, enforces alloy-semantic validation
rules, and scores extractions against ground truth with optimal assignment,
edit-distance process alignment and a weighted multi-category F1.
"""

from .datamodel import (
    CompMeasurement,
    Configuration,
    Experiment,
    GlobalLatticeParam,
    LatticeMeasurement,
    Material,
    Measurement,
    ProcessChainSpec,
    ProcessEvent,
    RawMaterial,
    ResolvedMaterial,
    SynthesisGroup,
    linearize,
    parse_process,
    render_process,
    resolve,
)
from .interchange import DecodeFailed, SchemaError, decode, encode
from .ontology import normalize, parse_enum, render_enum
from .quantities import QualifiedValue, Quantity, Unit, convert, parse_qualified, parse_unit
from .scoring import (
    Assignment,
    CategoryScore,
    ScoreReport,
    ScoringConfig,
    Weights,
    hungarian,
    pearson,
    run_ci,
    score_composition_list,
    score_overall,
    score_property_list,
)
from .validation import ValidationIssue, render_feedback, validate

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CategoryScore",
    "CompMeasurement",
    "Configuration",
    "DecodeFailed",
    "Experiment",
    "GlobalLatticeParam",
    "LatticeMeasurement",
    "Material",
    "Measurement",
    "ProcessChainSpec",
    "ProcessEvent",
    "QualifiedValue",
    "Quantity",
    "RawMaterial",
    "ResolvedMaterial",
    "SchemaError",
    "ScoreReport",
    "ScoringConfig",
    "SynthesisGroup",
    "Unit",
    "ValidationIssue",
    "Weights",
    "convert",
    "decode",
    "encode",
    "hungarian",
    "linearize",
    "normalize",
    "parse_enum",
    "parse_process",
    "parse_qualified",
    "parse_unit",
    "pearson",
    "render_enum",
    "render_feedback",
    "render_process",
    "resolve",
    "run_ci",
    "score_composition_list",
    "score_overall",
    "score_property_list",
    "validate",
]
