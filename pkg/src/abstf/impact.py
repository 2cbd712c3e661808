"""Change impact over the call graph: direct call-site counts and reverse reachability."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .cfg import CallGraph
from .selection import FunctionDelta


@dataclass(frozen=True)
class FunctionImpact:
    function: str
    call_sites: int
    impacted: frozenset

    def to_dict(self) -> dict:
        return {"function": self.function, "call_sites": self.call_sites, "impacted": sorted(self.impacted)}


@dataclass
class ImpactReport:
    entries: dict = field(default_factory=dict)

    @property
    def ranking(self) -> list:
        """Changed functions by descending direct call-site count, then name."""
        return sorted(self.entries, key=lambda f: (-self.entries[f].call_sites, f))

    def to_dict(self) -> dict:
        return {"impact": [self.entries[f].to_dict() for f in self.ranking]}

    @classmethod
    def from_dict(cls, data: dict) -> "ImpactReport":
        return cls({
            row["function"]: FunctionImpact(row["function"], row["call_sites"], frozenset(row["impacted"]))
            for row in data["impact"]
        })


def reverse_reachable(graph: CallGraph, target: str) -> set:
    """``target`` plus every function with a call path to it."""
    callers: dict = {}
    for site in graph.call_sites:
        callers.setdefault(site.callee, set()).add(site.caller)
    seen = {target}
    queue = deque([target])
    while queue:
        for caller in callers.get(queue.popleft(), ()):
            if caller not in seen:
                seen.add(caller)
                queue.append(caller)
    return seen


def direct_call_sites(graph: CallGraph, target: str) -> int:
    return sum(1 for s in graph.call_sites if s.callee == target and s.caller != target)


def compute_impact(delta: FunctionDelta, call_graph: CallGraph,
                   old_call_graph: Optional[CallGraph] = None) -> ImpactReport:
    """Impact of every added, modified or deleted function.

    Deleted functions are measured on ``old_call_graph`` (when given), since
    the new graph no longer has their callers' edges to them in context.
    """
    report = ImpactReport()
    for name in sorted(delta.changed):
        graph = call_graph
        if name in delta.deleted and old_call_graph is not None:
            graph = old_call_graph
        report.entries[name] = FunctionImpact(
            name, direct_call_sites(graph, name), frozenset(reverse_reachable(graph, name))
        )
    return report
