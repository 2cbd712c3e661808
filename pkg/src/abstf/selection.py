"""Safe regression test selection by lockstep CFG comparison.

Old and new graphs are walked together from their entries. An old edge is
dangerous when following it in the new graph is impossible or arrives at a
node with a different canonical label; any test whose recorded trace avoids
every dangerous edge executes identically on both versions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .cfg import Cfg, CallGraph
from .lang import Program


class TraceVersionMismatch(Exception):
    """A stored trace refers to edges the baseline CFGs do not have."""


@dataclass
class FunctionDelta:
    added: set = field(default_factory=set)
    deleted: set = field(default_factory=set)
    modified: set = field(default_factory=set)
    unchanged: set = field(default_factory=set)
    # Modified functions whose parameter list changed.
    signature_changed: set = field(default_factory=set)

    @property
    def empty(self) -> bool:
        return not (self.added or self.deleted or self.modified)

    @property
    def changed(self) -> set:
        return self.added | self.deleted | self.modified

    def to_dict(self) -> dict:
        return {
            "added": sorted(self.added),
            "deleted": sorted(self.deleted),
            "modified": sorted(self.modified),
            "unchanged": sorted(self.unchanged),
        }


def function_delta(old: dict, new: dict) -> FunctionDelta:
    """Classify functions given ``name -> (params, body_hash)`` for each version."""
    delta = FunctionDelta()
    for name in old.keys() | new.keys():
        if name not in new:
            delta.deleted.add(name)
        elif name not in old:
            delta.added.add(name)
        else:
            (op, oh), (np_, nh) = old[name], new[name]
            if tuple(op) != tuple(np_):
                delta.modified.add(name)
                delta.signature_changed.add(name)
            elif oh != nh:
                delta.modified.add(name)
            else:
                delta.unchanged.add(name)
    return delta


def program_signature(prog: Program) -> dict:
    return {fn.name: (tuple(fn.params), fn.body_hash) for fn in prog.functions}


def diff_programs(old: Program, new: Program) -> FunctionDelta:
    return function_delta(program_signature(old), program_signature(new))


def _same_node(a, b) -> bool:
    return a.kind == b.kind and a.label == b.label


def lockstep_pairs(old: Cfg, new: Cfg):
    """Walk both graphs together; returns (dangerous old edge keys, matched node pairs)."""
    dangerous = set()
    pairs = {(old.entry_id, new.entry_id)}
    stack = [(old.entry_id, new.entry_id)]
    while stack:
        n, n2 = stack.pop()
        for edge in old.out_edges(n):
            m2 = new.successor(n2, edge.label)
            if m2 is None or not _same_node(old.node(edge.dst), new.node(m2)):
                dangerous.add((n, edge.label))
                continue
            pair = (edge.dst, m2)
            if pair not in pairs:
                pairs.add(pair)
                stack.append(pair)
    return dangerous, pairs


def compare_cfgs(old: Cfg, new: Cfg) -> set:
    """Dangerous edge keys ``(src, label)`` of ``old`` with respect to ``new``."""
    return lockstep_pairs(old, new)[0]


def map_edges_to_new(old: Cfg, new: Cfg, keys) -> set:
    """Translate old-coordinate edge keys into ``new`` via the lockstep pairing.

    Keys whose source node has no counterpart, or whose counterpart lacks
    the label, are dropped.
    """
    _, pairs = lockstep_pairs(old, new)
    counterpart: dict = {}
    for n, n2 in pairs:
        counterpart.setdefault(n, set()).add(n2)
    mapped = set()
    for src, label in keys:
        for n2 in counterpart.get(src, ()):
            if new.successor(n2, label) is not None:
                mapped.add((n2, label))
    return mapped


def _in_edges_of_call_sites(cfg: Cfg, names: set) -> set:
    # Canonical labels spell every call as ``name(``, so a label scan is exact
    # and also works on graphs restored from a dump.
    pattern = re.compile(r"(?<![A-Za-z0-9_])(" + "|".join(map(re.escape, sorted(names))) + r")\(")
    hot = {node.id for node in cfg.nodes if node.label and pattern.search(node.label)}
    return {(e.src, e.label) for e in cfg.edges if e.dst in hot}


def dangerous_edges(
    old_cfgs: dict,
    new_cfgs: dict,
    delta: FunctionDelta,
    old_call_graph: Optional[CallGraph] = None,
    old_arity: Optional[dict] = None,
    new_arity: Optional[dict] = None,
) -> dict:
    """Dangerous edge sets for a whole program change, keyed by function.

    Modified functions get their lockstep diff; a parameter-list change marks
    every old edge. Callers of functions whose callability changed (added
    under a previously undefined name, deleted, or arity changed) also get
    the in-edges of those call sites, since the call itself now behaves
    differently even though the caller's text did not change.
    """
    result: dict = {}
    for name in sorted(delta.modified):
        old = old_cfgs[name]
        if name in delta.signature_changed:
            result[name] = old.edge_keys()
        else:
            result[name] = compare_cfgs(old, new_cfgs[name])

    callability = set(delta.deleted)
    if old_call_graph is not None:
        callability |= delta.added & old_call_graph.undefined_callees
    if old_arity is not None and new_arity is not None:
        callability |= {
            n for n in delta.signature_changed if old_arity.get(n) != new_arity.get(n)
        }
    if callability:
        for name, cfg in old_cfgs.items():
            if name in delta.deleted:
                continue
            hits = _in_edges_of_call_sites(cfg, callability)
            if hits:
                result[name] = result.get(name, set()) | hits
    return {k: v for k, v in result.items() if v}


@dataclass
class SelectionReport:
    selected: set = field(default_factory=set)
    reasons: dict = field(default_factory=dict)
    retest_all_required: bool = False
    new_functions_needing_tests: set = field(default_factory=set)

    def to_dict(self) -> dict:
        return {
            "selected": sorted(self.selected),
            "reasons": {t: self.reasons[t] for t in sorted(self.reasons)},
            "added": sorted(self.new_functions_needing_tests),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SelectionReport":
        return cls(set(data["selected"]), dict(data["reasons"]), False, set(data["added"]))


def select_tests(
    delta: FunctionDelta,
    dangerous: dict,
    traces: dict,
    call_graph: Optional[CallGraph] = None,
    old_cfgs: Optional[dict] = None,
    entries: Optional[dict] = None,
) -> SelectionReport:
    """Select every test that can behave differently on the new version.

    A test is selected when its old trace crosses a dangerous edge, when it
    entered a function that has since been deleted, or (given ``entries``,
    test name -> entry function) when its entry function was undefined in
    the old version and exists now.

    Raises:
        TraceVersionMismatch: if a trace names a function or edge missing
            from the old version (``call_graph`` / ``old_cfgs``).
    """
    known = set(call_graph.nodes) if call_graph is not None else None
    report = SelectionReport(new_functions_needing_tests=set(delta.added))
    for test in sorted(traces):
        trace = traces[test]
        reasons = []
        for fn in sorted(trace):
            edges = trace[fn]
            if not edges:
                continue
            if known is not None and fn not in known:
                raise TraceVersionMismatch(f"trace of {test!r} enters unknown function {fn!r}")
            if old_cfgs is not None:
                cfg = old_cfgs.get(fn)
                if cfg is None or not edges <= cfg.edge_keys():
                    raise TraceVersionMismatch(f"trace of {test!r} has edges absent from {fn!r}")
            if fn in delta.deleted:
                reasons.append({"deleted": fn})
            for src, label in sorted(edges & dangerous.get(fn, set())):
                reasons.append({"function": fn, "edge": [src, label]})
        if entries is not None and entries.get(test) in delta.added and entries[test] not in trace:
            reasons.append({"added_entry": entries[test]})
        if reasons:
            report.selected.add(test)
            report.reasons[test] = reasons
    return report
