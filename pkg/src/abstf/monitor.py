"""Baseline snapshots, change detection, and the end-to-end maintenance pipeline.

The pipeline stages run in a fixed order: detect changes, diff CFGs, select
tests, measure impact, re-run only the selected tests, check traceability,
then synthesize tests for changed code nobody reached.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from .cfg import Cfg, CallGraph, build_call_graph, build_cfgs
from .config import ProjectConfig, load_config
from .impact import compute_impact
from .interp import (
    TestCase,
    TestOutcome,
    execute_suite,
    load_suite,
    parse_trace_record,
    suite_to_dict,
    trace_record,
)
from .lang import Program, parse_project, serialize_function
from .report import CHANGES, FATAL, PipelineReport, render_json, render_text
from .selection import (
    FunctionDelta,
    TraceVersionMismatch,
    dangerous_edges,
    function_delta,
    select_tests,
)
from .testgen import find_targets, synthesize_tests
from .trace_matrix import UnknownRequirement, build_matrix, check_completeness, load_requirements

log = logging.getLogger(__name__)

SNAPSHOT_FILE = "snapshot.json"
TRACES_FILE = "traces.json"
REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
GENERATED_FILE = "generated_tests.json"


class NoSnapshot(FileNotFoundError):
    pass


@dataclass
class Snapshot:
    version: int
    functions: dict   # name -> {"params", "body_hash", "cfg", "text"}
    call_graph: dict
    suite: list       # test dicts, manifest order
    suite_digest: str
    traces: dict      # test -> {function: frozenset of (src, label)}
    outcomes: dict    # test -> TestOutcome
    created: str = ""

    def cfgs(self) -> dict:
        return {name: Cfg.from_dict(f["cfg"]) for name, f in self.functions.items()}

    def graph(self) -> CallGraph:
        return CallGraph.from_dict(self.call_graph)

    def tests(self) -> list:
        return [TestCase.from_dict(t) for t in self.suite]

    def signature(self) -> dict:
        return {name: (tuple(f["params"]), f["body_hash"]) for name, f in self.functions.items()}


@dataclass
class ChangeSet:
    delta: FunctionDelta
    texts: dict = field(default_factory=dict)  # modified name -> (old text, new text)

    @property
    def empty(self) -> bool:
        return self.delta.empty

    def to_dict(self) -> dict:
        d = self.delta.to_dict()
        d.pop("unchanged")
        d["texts"] = {n: {"old": o, "new": w} for n, (o, w) in sorted(self.texts.items())}
        return d


# --------------------------------------------------------------------------- storage


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def save_snapshot(snap: Snapshot, state_dir) -> None:
    state_dir = Path(state_dir)
    meta = {
        "version": snap.version,
        "created": snap.created,
        "functions": snap.functions,
        "call_graph": snap.call_graph,
        "suite": snap.suite,
        "suite_digest": snap.suite_digest,
    }
    lines = [
        json.dumps(trace_record(t["name"], snap.outcomes[t["name"]], snap.traces.get(t["name"], {})),
                   sort_keys=True)
        for t in snap.suite
    ]
    _atomic_write(state_dir / TRACES_FILE, "".join(line + "\n" for line in lines))
    _atomic_write(state_dir / SNAPSHOT_FILE, json.dumps(meta, indent=1, sort_keys=True) + "\n")


def load_snapshot(state_dir) -> Snapshot:
    state_dir = Path(state_dir)
    path = state_dir / SNAPSHOT_FILE
    if not path.exists():
        raise NoSnapshot(f"no baseline snapshot at {path}; run 'abstf snapshot' first")
    meta = json.loads(path.read_text(encoding="utf-8"))
    traces, outcomes = {}, {}
    for line in (state_dir / TRACES_FILE).read_text(encoding="utf-8").splitlines():
        if line.strip():
            name, outcome, trace = parse_trace_record(json.loads(line))
            traces[name] = trace
            outcomes[name] = outcome
    return Snapshot(
        meta["version"], meta["functions"], meta["call_graph"], meta["suite"],
        meta["suite_digest"], traces, outcomes, meta.get("created", ""),
    )


# --------------------------------------------------------------------------- project loading


def _config(project) -> ProjectConfig:
    return project if isinstance(project, ProjectConfig) else load_config(project)


def load_program(cfg: ProjectConfig) -> Program:
    exclude = [cfg.state_dir]
    return parse_project(cfg.source_path, exclude=exclude)


def load_reqs(cfg: ProjectConfig) -> list:
    return load_requirements(cfg.requirements_path) if cfg.requirements_path.exists() else []


def _digest(data) -> str:
    return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()


def take_snapshot(project, now: Optional[Callable[[], str]] = None, save: bool = True) -> Snapshot:
    """Parse, build CFGs, run the whole suite, and persist the baseline.

    Test failures are recorded as outcomes; only parse errors abort.
    """
    cfg = _config(project)
    prog = load_program(cfg)
    suite = load_suite(cfg.tests_path, prog)
    cfgs = build_cfgs(prog)
    results = execute_suite(prog, cfgs, suite, cfg.step_limit)
    previous = 0
    if (cfg.state_path / SNAPSHOT_FILE).exists():
        previous = json.loads((cfg.state_path / SNAPSHOT_FILE).read_text(encoding="utf-8"))["version"]
    suite_data = suite_to_dict(suite)["tests"]
    snap = Snapshot(
        version=previous + 1,
        functions={
            fn.name: {
                "params": list(fn.params),
                "body_hash": fn.body_hash,
                "cfg": cfgs[fn.name].to_dict(),
                "text": serialize_function(fn),
            }
            for fn in prog.functions
        },
        call_graph=build_call_graph(prog).to_dict(),
        suite=suite_data,
        suite_digest=_digest(suite_data),
        traces={r.test.name: r.trace for r in results},
        outcomes={r.test.name: r.outcome for r in results},
        created=(now or _utc_now)(),
    )
    if save:
        save_snapshot(snap, cfg.state_path)
    return snap


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def detect_changes(snapshot: Snapshot, project, prog: Optional[Program] = None) -> ChangeSet:
    """Compare the baseline against the current sources by canonical hash."""
    if prog is None:
        prog = load_program(_config(project))
    new_sig = {fn.name: (tuple(fn.params), fn.body_hash) for fn in prog.functions}
    delta = function_delta(snapshot.signature(), new_sig)
    fns = prog.by_name
    texts = {name: (snapshot.functions[name]["text"], serialize_function(fns[name])) for name in delta.modified}
    return ChangeSet(delta, texts)


# --------------------------------------------------------------------------- pipeline


def _outcome_dict(o: TestOutcome) -> dict:
    return {"status": o.status, "value": o.value, "error": o.error_kind}


def run_pipeline(snapshot: Snapshot, project, write: bool = False) -> PipelineReport:
    """One full pass of the maintenance pipeline against ``snapshot``.

    Only tests chosen by safe selection are executed on the new version.
    Project-level failures (unknown requirement ids, traces that no longer
    match the baseline) produce a report with status ``error``; parse errors
    propagate.
    """
    cfg = _config(project)
    prog = load_program(cfg)
    report = PipelineReport(version=snapshot.version)
    if cfg.tests_path.exists():
        try:
            current_suite = suite_to_dict(load_suite(cfg.tests_path))["tests"]
        except (ValueError, KeyError):
            current_suite = None
        if current_suite is None or _digest(current_suite) != snapshot.suite_digest:
            report.warnings.append("tests.json changed since the baseline; selection uses the baseline suite")

    changes = detect_changes(snapshot, cfg, prog)
    if changes.empty:
        if write:
            write_report(report, cfg)
        return report

    delta = changes.delta
    report.status = CHANGES
    report.changes = changes.to_dict()
    old_cfgs = snapshot.cfgs()
    new_cfgs = build_cfgs(prog)
    old_graph = snapshot.graph()
    new_graph = build_call_graph(prog)
    old_arity = {n: len(f["params"]) for n, f in snapshot.functions.items()}
    new_arity = {fn.name: fn.arity for fn in prog.functions}

    dangerous = dangerous_edges(old_cfgs, new_cfgs, delta, old_graph, old_arity, new_arity)
    report.dangerous_edges = {fn: [[s, l] for s, l in sorted(edges)] for fn, edges in sorted(dangerous.items())}

    suite = snapshot.tests()
    entries = {t.name: t.entry for t in suite}
    try:
        selection = select_tests(delta, dangerous, snapshot.traces, old_graph, old_cfgs, entries)
    except TraceVersionMismatch as exc:
        report.status = FATAL
        report.error = f"{exc}; stored traces do not match the baseline, re-run 'abstf snapshot'"
        if write:
            write_report(report, cfg)
        return report
    report.selection = selection.to_dict()
    report.impact = compute_impact(delta, new_graph, old_graph).to_dict()["impact"]

    rerun = [t for t in suite if t.name in selection.selected]
    results = execute_suite(prog, new_cfgs, rerun, cfg.step_limit)
    report.executed = [r.test.name for r in results]
    new_traces = {r.test.name: r.trace for r in results}

    merged = {t.name: snapshot.traces.get(t.name, {}) for t in suite}
    merged.update(new_traces)
    try:
        reqs = load_reqs(cfg)
        matrix = build_matrix(reqs, prog, merged)
    except UnknownRequirement as exc:
        report.status = FATAL
        report.error = str(exc)
        if write:
            write_report(report, cfg)
        return report
    findings = check_completeness(matrix, reqs, prog, suite, delta, selection)
    report.findings = [f.to_dict() for f in findings]

    for r in results:
        old = snapshot.outcomes.get(r.test.name)
        if old != r.outcome:
            report.regressions.append({
                "test": r.test.name,
                "old": _outcome_dict(old) if old else None,
                "new": _outcome_dict(r.outcome),
                "reasons": selection.reasons.get(r.test.name, []),
                "requirements": sorted(req for t, req in matrix.covers if t == r.test.name),
            })

    targets = find_targets(dangerous, delta, selection, new_traces, old_cfgs, new_cfgs, new_graph)
    synth = synthesize_tests(targets, prog, new_cfgs, cfg.domain, cfg.budget, cfg.step_limit,
                             existing_names=[t.name for t in suite])
    report.generated_tests = synth.to_dict()
    if write:
        write_report(report, cfg)
    return report


def write_report(report: PipelineReport, project) -> None:
    cfg = _config(project)
    state = cfg.state_path
    _atomic_write(state / REPORT_JSON, render_json(report))
    _atomic_write(state / REPORT_TEXT, render_text(report) + "\n")
    if report.generated_tests["tests"]:
        _atomic_write(state / GENERATED_FILE,
                      json.dumps({"tests": report.generated_tests["tests"]}, indent=2, sort_keys=True) + "\n")


def load_report(project) -> PipelineReport:
    cfg = _config(project)
    path = cfg.state_path / REPORT_JSON
    return PipelineReport.from_dict(json.loads(path.read_text(encoding="utf-8")))


# --------------------------------------------------------------------------- watch mode


def source_fingerprint(cfg: ProjectConfig) -> dict:
    """Content hash per source file; raises OSError if a file is unreadable."""
    state = cfg.state_path.resolve()
    prints = {}
    for path in sorted(cfg.source_path.rglob("*.ml0")):
        if path.resolve().is_relative_to(state):
            continue
        prints[path.relative_to(cfg.root).as_posix()] = hashlib.sha256(path.read_bytes()).hexdigest()
    return prints


def watch_loop(
    project,
    interval: Optional[float] = None,
    auto_baseline: bool = False,
    max_ticks: Optional[int] = None,
    sleep: Callable[[float], None] = time.sleep,
    on_report: Optional[Callable[[PipelineReport], None]] = None,
) -> int:
    """Poll source hashes and run the pipeline once per observed change.

    Runs until interrupted (or for ``max_ticks`` ticks). Pipelines never
    overlap: a change made while one runs is seen on the next tick. The
    baseline only advances when ``auto_baseline`` is set. Returns the number
    of reports emitted.
    """
    cfg = _config(project)
    interval = cfg.interval if interval is None else interval
    last = source_fingerprint(cfg)
    reports = 0
    tick = 0
    try:
        while max_ticks is None or tick < max_ticks:
            tick += 1
            sleep(interval)
            try:
                current = source_fingerprint(cfg)
            except OSError as exc:
                log.warning("unreadable source, retrying next tick: %s", exc)
                continue
            if current == last:
                continue
            last = current
            try:
                snapshot = load_snapshot(cfg.state_path)
                report = run_pipeline(snapshot, cfg, write=True)
            except Exception as exc:  # keep watching through broken edits
                log.error("pipeline failed: %s", exc)
                continue
            reports += 1
            if on_report is not None:
                on_report(report)
            if auto_baseline and report.status != FATAL:
                take_snapshot(cfg)
    except KeyboardInterrupt:
        pass
    return reports
