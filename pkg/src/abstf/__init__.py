"""Regression-maintenance toolkit for MiniLang projects.

Parses MiniLang, builds control-flow and call graphs, selects a safe subset
of regression tests after a change, measures call-graph impact, checks
requirements traceability, and synthesizes characterization tests for
changed code that no existing test reaches.
"""

from .cfg import CallGraph, Cfg, CfgEdge, CfgNode, build_call_graph, build_cfg, build_cfgs
from .impact import ImpactReport, compute_impact
from .interp import (
    ExpectError,
    ExpectValue,
    TestCase,
    TestOutcome,
    execute_suite,
    load_suite,
    run_test,
)
from .lang import (
    DuplicateFunction,
    FunctionDef,
    ParseError,
    Program,
    canonical_label,
    parse_program,
    parse_project,
    serialize_program,
)
from .monitor import ChangeSet, Snapshot, detect_changes, load_snapshot, run_pipeline, take_snapshot, watch_loop
from .report import PipelineReport, render_report
from .selection import (
    FunctionDelta,
    SelectionReport,
    TraceVersionMismatch,
    compare_cfgs,
    dangerous_edges,
    diff_programs,
    select_tests,
)
from .testgen import GeneratedTest, GenTarget, find_targets, synthesize_tests
from .trace_matrix import Finding, Requirement, TraceMatrix, UnknownRequirement, build_matrix, check_completeness

__version__ = "0.1.0"

__all__ = [
    "CallGraph",
    "Cfg",
    "CfgEdge",
    "CfgNode",
    "build_call_graph",
    "build_cfg",
    "build_cfgs",
    "ImpactReport",
    "compute_impact",
    "ExpectError",
    "ExpectValue",
    "TestCase",
    "TestOutcome",
    "execute_suite",
    "load_suite",
    "run_test",
    "DuplicateFunction",
    "FunctionDef",
    "ParseError",
    "Program",
    "canonical_label",
    "parse_program",
    "parse_project",
    "serialize_program",
    "ChangeSet",
    "Snapshot",
    "detect_changes",
    "load_snapshot",
    "run_pipeline",
    "take_snapshot",
    "watch_loop",
    "PipelineReport",
    "render_report",
    "FunctionDelta",
    "SelectionReport",
    "TraceVersionMismatch",
    "compare_cfgs",
    "dangerous_edges",
    "diff_programs",
    "select_tests",
    "GeneratedTest",
    "GenTarget",
    "find_targets",
    "synthesize_tests",
    "Finding",
    "Requirement",
    "TraceMatrix",
    "UnknownRequirement",
    "build_matrix",
    "check_completeness",
]
