"""Requirements traceability: implements / exercises / covers relations and
rule-based completeness checking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .lang import Program

MISSING_IMPLEMENTATION = "MISSING_IMPLEMENTATION"
UNTRACED_CODE = "UNTRACED_CODE"
MISSING_TEST = "MISSING_TEST"
UNTRACED_TEST = "UNTRACED_TEST"
STALE_REQ_ON_CHANGE = "STALE_REQ_ON_CHANGE"

FINDING_KINDS = (MISSING_IMPLEMENTATION, UNTRACED_CODE, MISSING_TEST, UNTRACED_TEST, STALE_REQ_ON_CHANGE)
BLOCKING_KINDS = (MISSING_IMPLEMENTATION, MISSING_TEST)


class UnknownRequirement(Exception):
    """An annotation names a requirement id that is not declared."""


@dataclass(frozen=True)
class Requirement:
    id: str
    text: str = ""


@dataclass(frozen=True, order=True)
class Finding:
    kind: str
    subject: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "detail": self.detail}

    @classmethod
    def from_dict(cls, data: dict) -> "Finding":
        return cls(data["kind"], data["subject"], data.get("detail", ""))


@dataclass
class TraceMatrix:
    implements: set = field(default_factory=set)  # (function, req)
    exercises: set = field(default_factory=set)   # (test, function)
    covers: set = field(default_factory=set)      # (test, req)


def load_requirements(path) -> list:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    reqs = [Requirement(r["id"], r.get("text", "")) for r in data["requirements"]]
    ids = [r.id for r in reqs]
    if len(set(ids)) != len(ids):
        raise ValueError("requirement ids must be unique")
    return reqs


def build_matrix(reqs, prog: Program, traces: dict) -> TraceMatrix:
    """Derive the three relations.

    ``implements`` comes from ``#[req]`` annotations, ``exercises`` from
    nonempty per-function traces, and ``covers`` is their composition.

    Raises:
        UnknownRequirement: if an annotation is not in ``reqs``.
    """
    known = {r.id for r in reqs}
    implements = set()
    for fn in prog.functions:
        for req in fn.reqs:
            if req not in known:
                raise UnknownRequirement(f"function {fn.name!r} names unknown requirement {req!r}")
            implements.add((fn.name, req))
    defined = set(prog.names)
    exercises = {
        (test, fn)
        for test, trace in traces.items()
        for fn, edges in trace.items()
        if edges and fn in defined
    }
    reqs_of: dict = {}
    for fn, req in implements:
        reqs_of.setdefault(fn, set()).add(req)
    covers = {(test, req) for test, fn in exercises for req in reqs_of.get(fn, ())}
    return TraceMatrix(implements, exercises, covers)


def check_completeness(
    matrix: TraceMatrix,
    reqs,
    prog: Program,
    suite,
    delta=None,
    selection=None,
) -> list:
    """Relational-emptiness checks over the matrix, sorted by (kind, subject)."""
    findings = []
    implemented = {r for _, r in matrix.implements}
    covered = {r for _, r in matrix.covers}
    annotated = {f for f, _ in matrix.implements}

    for req in reqs:
        if req.id not in implemented:
            findings.append(Finding(MISSING_IMPLEMENTATION, req.id, "no function implements this requirement"))
        elif req.id not in covered:
            findings.append(Finding(MISSING_TEST, req.id, "implemented but exercised by no test"))
    for fn in prog.functions:
        if fn.name not in annotated:
            findings.append(Finding(UNTRACED_CODE, fn.name, "function carries no #[req] annotation"))
    tests_hitting_annotated = {t for t, f in matrix.exercises if f in annotated}
    for test in suite:
        name = getattr(test, "name", test)
        if name not in tests_hitting_annotated:
            findings.append(Finding(UNTRACED_TEST, name, "test exercises no annotated function"))

    if delta is not None:
        selected = selection.selected if selection is not None else set()
        stale: dict = {}
        for fn, req in matrix.implements:
            if fn in delta.modified:
                stale.setdefault(req, set()).add(fn)
        for req in sorted(stale):
            covering = {t for t, r in matrix.covers if r == req}
            if not covering & selected:
                fns = ", ".join(sorted(stale[req]))
                findings.append(Finding(
                    STALE_REQ_ON_CHANGE, req, f"implemented by modified {fns}; no covering test was selected"
                ))
    return sorted(findings)
