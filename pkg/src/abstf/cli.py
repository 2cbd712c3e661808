"""``abstf`` command line.

Exit codes: 0 clean, 1 regressions or missing-element findings, 2 usage or
fatal errors. Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import monitor
from .cfg import build_call_graph, build_cfgs
from .config import CONFIG_NAME, ConfigError, ProjectConfig, load_config
from .impact import compute_impact
from .interp import SuiteError, execute_suite, load_suite
from .lang import ParseError
from .report import PipelineReport, render_report
from .selection import TraceVersionMismatch, dangerous_edges, select_tests
from .testgen import find_targets, synthesize_tests
from .trace_matrix import BLOCKING_KINDS, UnknownRequirement, build_matrix, check_completeness

log = logging.getLogger("abstf")


class UsageError(Exception):
    pass


def _domain(text: str) -> tuple:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            raise ValueError
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--project", default=".", help="project root (default: .)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--step-limit", type=_positive_int)
    common.add_argument("--auto-baseline", action="store_true")
    common.add_argument("--interval", type=_positive_float, metavar="SECONDS")
    common.add_argument("--domain", type=_domain, metavar="LO..HI")
    common.add_argument("--budget", type=_positive_int)

    parser = argparse.ArgumentParser(prog="abstf", description="Regression maintenance for MiniLang projects.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, help_text in [
        ("init", f"write a default {CONFIG_NAME}"),
        ("snapshot", "record a new baseline"),
        ("run", "run the full pipeline once"),
        ("watch", "poll for changes and run the pipeline on each"),
        ("select", "show safe test selection without executing tests"),
        ("impact", "show call-graph impact of changes"),
        ("trace", "run the suite and check traceability"),
        ("gen", "generate tests for uncovered changed code"),
        ("report", "re-render the last report"),
    ]:
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _config(args) -> ProjectConfig:
    root = Path(args.project)
    if not root.is_dir():
        raise UsageError(f"project directory not found: {root}")
    cfg = load_config(root)
    overrides = {"step_limit": args.step_limit, "budget": args.budget, "interval": args.interval}
    if args.domain:
        overrides.update(domain_lo=args.domain[0], domain_hi=args.domain[1])
    return cfg.with_overrides(**overrides)


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def cmd_init(args, cfg: ProjectConfig) -> int:
    path = cfg.root / CONFIG_NAME
    if path.exists():
        log.warning("%s already exists; leaving it unchanged", path)
    else:
        path.write_text(cfg.dumps(), encoding="utf-8")
        _emit(f"wrote {path}")
    return 0


def cmd_snapshot(args, cfg) -> int:
    snap = monitor.take_snapshot(cfg)
    summary = {"version": snap.version, "functions": len(snap.functions), "tests": len(snap.suite)}
    _emit(_json(summary) if args.format == "json" else
          f"snapshot version {snap.version}: {len(snap.functions)} functions, {len(snap.suite)} tests")
    return 0


def cmd_run(args, cfg) -> int:
    snap = monitor.load_snapshot(cfg.state_path)
    report = monitor.run_pipeline(snap, cfg, write=True)
    _emit(render_report(report, args.format))
    return report.exit_code


def cmd_watch(args, cfg) -> int:
    monitor.load_snapshot(cfg.state_path)
    log.info("watching %s every %ss (Ctrl-C to stop)", cfg.source_path, cfg.interval)

    def show(report: PipelineReport):
        _emit(render_report(report, args.format))
        sys.stdout.flush()

    monitor.watch_loop(cfg, auto_baseline=args.auto_baseline, on_report=show)
    return 0


def _static_stage(cfg):
    snap = monitor.load_snapshot(cfg.state_path)
    prog = monitor.load_program(cfg)
    changes = monitor.detect_changes(snap, cfg, prog)
    return snap, prog, changes


def cmd_select(args, cfg) -> int:
    snap, prog, changes = _static_stage(cfg)
    old_cfgs, new_cfgs = snap.cfgs(), build_cfgs(prog)
    old_arity = {n: len(f["params"]) for n, f in snap.functions.items()}
    dangerous = dangerous_edges(old_cfgs, new_cfgs, changes.delta, snap.graph(), old_arity,
                                {fn.name: fn.arity for fn in prog.functions})
    entries = {t["name"]: t["entry"] for t in snap.suite}
    selection = select_tests(changes.delta, dangerous, snap.traces, snap.graph(), old_cfgs, entries)
    report = PipelineReport(version=snap.version, status="changes" if not changes.empty else "no changes",
                            changes=changes.to_dict(), selection=selection.to_dict(),
                            dangerous_edges={f: [[s, l] for s, l in sorted(e)] for f, e in sorted(dangerous.items())})
    _emit(_json(selection.to_dict()) if args.format == "json" else render_report(report, "text"))
    return 0


def cmd_impact(args, cfg) -> int:
    snap, prog, changes = _static_stage(cfg)
    impact = compute_impact(changes.delta, build_call_graph(prog), snap.graph()).to_dict()
    if args.format == "json":
        _emit(_json(impact))
    else:
        report = PipelineReport(version=snap.version, changes=changes.to_dict(), impact=impact["impact"])
        _emit(render_report(report, "text"))
    return 0


def cmd_trace(args, cfg) -> int:
    prog = monitor.load_program(cfg)
    suite = load_suite(cfg.tests_path, prog)
    reqs = monitor.load_reqs(cfg)
    results = execute_suite(prog, None, suite, cfg.step_limit)
    matrix = build_matrix(reqs, prog, {r.test.name: r.trace for r in results})
    findings = check_completeness(matrix, reqs, prog, suite)
    data = {
        "implements": sorted(map(list, matrix.implements)),
        "exercises": sorted(map(list, matrix.exercises)),
        "covers": sorted(map(list, matrix.covers)),
        "findings": [f.to_dict() for f in findings],
    }
    if args.format == "json":
        _emit(_json(data))
    else:
        lines = ["TRACEABILITY MATRIX"]
        lines += [f"  {t} covers {r}" for t, r in data["covers"]] or ["  (none)"]
        lines += ["", "TRACEABILITY FINDINGS"]
        lines += [f"  {f.kind} {f.subject}: {f.detail}" for f in findings] or ["  (none)"]
        _emit("\n".join(lines))
    return 1 if any(f.kind in BLOCKING_KINDS for f in findings) else 0


def cmd_gen(args, cfg) -> int:
    snap, prog, changes = _static_stage(cfg)
    delta = changes.delta
    old_cfgs, new_cfgs = snap.cfgs(), build_cfgs(prog)
    old_arity = {n: len(f["params"]) for n, f in snap.functions.items()}
    dangerous = dangerous_edges(old_cfgs, new_cfgs, delta, snap.graph(), old_arity,
                                {fn.name: fn.arity for fn in prog.functions})
    suite = snap.tests()
    selection = select_tests(delta, dangerous, snap.traces, snap.graph(), old_cfgs,
                             {t.name: t.entry for t in suite})
    rerun = [t for t in suite if t.name in selection.selected]
    new_traces = {r.test.name: r.trace for r in execute_suite(prog, new_cfgs, rerun, cfg.step_limit)}
    targets = find_targets(dangerous, delta, selection, new_traces, old_cfgs, new_cfgs, build_call_graph(prog))
    synth = synthesize_tests(targets, prog, new_cfgs, cfg.domain, cfg.budget, cfg.step_limit,
                             existing_names=[t.name for t in suite])
    data = synth.to_dict()
    if data["tests"]:
        monitor._atomic_write(cfg.state_path / monitor.GENERATED_FILE,
                              _json({"tests": data["tests"]}) + "\n")
    if args.format == "json":
        _emit(_json(data))
    else:
        _emit(render_report(PipelineReport(version=snap.version, generated_tests=data), "text"))
    return 0


def cmd_report(args, cfg) -> int:
    report = monitor.load_report(cfg)
    _emit(render_report(report, args.format))
    return report.exit_code


COMMANDS = {
    "init": cmd_init,
    "snapshot": cmd_snapshot,
    "run": cmd_run,
    "watch": cmd_watch,
    "select": cmd_select,
    "impact": cmd_impact,
    "trace": cmd_trace,
    "gen": cmd_gen,
    "report": cmd_report,
}


def dispatch(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="abstf: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return 2
    except (ParseError, SuiteError, ConfigError, UnknownRequirement, TraceVersionMismatch,
            monitor.NoSnapshot, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
