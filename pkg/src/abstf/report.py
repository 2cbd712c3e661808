"""Pipeline report model and its text/JSON renderings."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from .trace_matrix import BLOCKING_KINDS

NO_CHANGES = "no changes"
CHANGES = "changes"
FATAL = "error"


@dataclass
class PipelineReport:
    """Everything one pipeline run found; every field is plain JSON data."""

    version: int = 0
    status: str = NO_CHANGES
    changes: dict = field(default_factory=lambda: {"added": [], "deleted": [], "modified": [], "texts": {}})
    dangerous_edges: dict = field(default_factory=dict)
    selection: dict = field(default_factory=lambda: {"selected": [], "reasons": {}, "added": []})
    executed: list = field(default_factory=list)
    impact: list = field(default_factory=list)
    regressions: list = field(default_factory=list)
    findings: list = field(default_factory=list)
    generated_tests: dict = field(default_factory=lambda: {"tests": [], "unmet": []})
    warnings: list = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineReport":
        return cls(**data)

    @property
    def exit_code(self) -> int:
        if self.status == FATAL:
            return 2
        if self.regressions or any(f["kind"] in BLOCKING_KINDS for f in self.findings):
            return 1
        return 0


def render_json(report: PipelineReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def _section(title: str, lines: list) -> list:
    return [title, *(lines or ["  (none)"]), ""]


def _reason_text(reason: dict) -> str:
    if "deleted" in reason:
        return f"calls deleted function {reason['deleted']}"
    if "added_entry" in reason:
        return f"entry function {reason['added_entry']} was added"
    src, label = reason["edge"]
    return f"{reason['function']} edge ({src}, {label})"


def render_text(report: PipelineReport) -> str:
    out = [f"ABSTF report (baseline version {report.version}): {report.status}", ""]
    if report.error:
        out += ["ERROR", f"  {report.error}", ""]
    for w in report.warnings:
        out.append(f"warning: {w}")
    if report.warnings:
        out.append("")

    ch = report.changes
    lines = [f"  {kind:<8} {name}" for kind in ("added", "deleted", "modified") for name in ch.get(kind, [])]
    out += _section("CHANGES", lines)

    lines = [
        f"  {fn}: " + ", ".join(f"({s}, {l})" for s, l in edges)
        for fn, edges in sorted(report.dangerous_edges.items())
    ]
    out += _section("DANGEROUS EDGES", lines)

    sel = report.selection
    lines = [
        f"  {t}: " + "; ".join(_reason_text(r) for r in sel["reasons"].get(t, []))
        for t in sel["selected"]
    ]
    out += _section("SELECTED TESTS", lines)

    lines = [
        f"  {row['function']}: {row['call_sites']} call site(s); impacted: {', '.join(row['impacted'])}"
        for row in report.impact
    ]
    out += _section("IMPACT", lines)

    lines = []
    for r in report.regressions:
        lines.append(f"  {r['test']}: {_outcome_text(r['old'])} -> {_outcome_text(r['new'])}")
        if r.get("reasons"):
            lines.append("    at " + "; ".join(_reason_text(x) for x in r["reasons"]))
        if r.get("requirements"):
            lines.append("    requirements: " + ", ".join(r["requirements"]))
    out += _section("REGRESSIONS", lines)

    lines = [f"  {f['kind']} {f['subject']}: {f['detail']}" for f in report.findings]
    out += _section("TRACEABILITY FINDINGS", lines)

    gen = report.generated_tests
    lines = [
        f"  {t['name']}: {t['entry']}({', '.join(map(str, t['args']))}) expects "
        f"{_expected_text(t['expected'])} [characterization, review]"
        for t in gen["tests"]
    ]
    lines += [
        f"  unmet: {u['function']} edge ({u['edge'][0]}, {u['edge'][1]}) after {u['trials']} trials"
        for u in gen["unmet"]
    ]
    out += _section("GENERATED TESTS", lines)
    return "\n".join(out)


def _outcome_text(o) -> str:
    if o is None:
        return "not run"
    if o.get("error"):
        return f"{o['status']} (error {o['error']})"
    return f"{o['status']} (value {o['value']})"


def _expected_text(exp) -> str:
    return "an error" if exp == "error" else f"value {exp['value']}"


def render_report(report: PipelineReport, fmt: str = "text") -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "text":
        return render_text(report)
    raise ValueError(f"unknown format {fmt!r}")
