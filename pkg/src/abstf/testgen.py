"""Characterization-test synthesis for changed code that no selected test reaches.

Search is bounded and exhaustive: entry candidates in a fixed order, argument
tuples in lexicographic order over a small integer domain. The first input
whose trace crosses the target edge becomes a test whose expected outcome is
whatever the new version did.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .cfg import CallGraph
from .interp import DEFAULT_STEP_LIMIT, ExpectError, ExpectValue, TestCase, run_test
from .selection import map_edges_to_new

DEFAULT_DOMAIN = (-8, 8)
DEFAULT_BUDGET = 10_000


@dataclass(frozen=True)
class GenTarget:
    function: str
    edge: tuple
    entry_candidates: tuple

    def to_dict(self) -> dict:
        return {"function": self.function, "edge": list(self.edge)}


@dataclass(frozen=True)
class GeneratedTest:
    test: TestCase
    target: GenTarget

    @property
    def name(self) -> str:
        return self.test.name

    def to_dict(self) -> dict:
        d = self.test.to_dict()
        d["provenance"] = self.target.to_dict()
        return d


@dataclass
class SynthesisResult:
    generated: list = field(default_factory=list)
    unmet: list = field(default_factory=list)  # (GenTarget, trials)

    def to_dict(self) -> dict:
        return {
            "tests": [g.to_dict() for g in self.generated],
            "unmet": [dict(t.to_dict(), trials=n) for t, n in self.unmet],
        }


def entry_candidates(call_graph: CallGraph, function: str) -> tuple:
    """``function`` first, then its transitive callers by call distance, then name."""
    callers: dict = {}
    for site in call_graph.call_sites:
        if site.defined:
            callers.setdefault(site.callee, set()).add(site.caller)
    dist = {function: 0}
    queue = deque([function])
    while queue:
        cur = queue.popleft()
        for c in sorted(callers.get(cur, ())):
            if c not in dist:
                dist[c] = dist[cur] + 1
                queue.append(c)
    return tuple(sorted(dist, key=lambda f: (dist[f], f)))


def find_targets(dangerous: dict, delta, selection, new_traces: dict, old_cfgs: dict,
                 new_cfgs: dict, call_graph: CallGraph) -> list:
    """Edges of changed code, in new-version coordinates, that no selected test crossed.

    ``dangerous`` is in old coordinates and is mapped through the lockstep
    pairing. Every edge of an added function is a target.
    """
    covered: dict = {}
    for test in selection.selected:
        for fn, edges in new_traces.get(test, {}).items():
            covered.setdefault(fn, set()).update(edges)
    targets = []
    for fn in sorted(delta.modified):
        if fn not in new_cfgs or fn not in dangerous:
            continue
        mapped = map_edges_to_new(old_cfgs[fn], new_cfgs[fn], dangerous[fn])
        for edge in sorted(mapped - covered.get(fn, set())):
            targets.append(GenTarget(fn, edge, entry_candidates(call_graph, fn)))
    for fn in sorted(delta.added):
        cands = entry_candidates(call_graph, fn)
        for edge in sorted(new_cfgs[fn].edge_keys()):
            targets.append(GenTarget(fn, edge, cands))
    return targets


def synthesize_tests(targets, prog, cfgs, domain=DEFAULT_DOMAIN, budget: int = DEFAULT_BUDGET,
                     step_limit: int = DEFAULT_STEP_LIMIT, existing_names=()) -> SynthesisResult:
    """Bounded exhaustive search for inputs reaching each target edge.

    Executions are memoized across targets, so trying the same
    ``(entry, args)`` for a second target costs a lookup, not a run. A target
    already crossed by an earlier generated test is skipped.
    """
    lo, hi = domain
    values = range(lo, hi + 1)
    fns = prog.by_name
    cache: dict = {}
    used = set(existing_names)
    result = SynthesisResult()
    reached: dict = {}  # edges already crossed by a generated test

    def execute(entry, args):
        key = (entry, args)
        if key not in cache:
            cache[key] = run_test(prog, cfgs, TestCase("_probe", entry, args, ExpectError()), step_limit)
        return cache[key]

    for target in targets:
        if target.edge in reached.get(target.function, ()):
            continue
        trials = 0
        hit = None
        for entry in target.entry_candidates:
            fn = fns.get(entry)
            if fn is None:
                continue
            for args in itertools.product(values, repeat=fn.arity):
                if trials >= budget:
                    break
                trials += 1
                outcome, trace = execute(entry, args)
                if target.edge in trace.get(target.function, ()):
                    hit = (entry, args, outcome)
                    break
            if hit or trials >= budget:
                break
        if hit is None:
            result.unmet.append((target, trials))
            continue
        entry, args, outcome = hit
        for f, edges in execute(entry, args)[1].items():
            reached.setdefault(f, set()).update(edges)
        expected = ExpectError() if outcome.error_kind is not None else ExpectValue(outcome.value)
        name = _fresh_name(f"gen_{target.function}_{target.edge[0]}_{target.edge[1]}", used)
        result.generated.append(GeneratedTest(TestCase(name, entry, args, expected), target))
    return result


def _fresh_name(base: str, used: set) -> str:
    name, k = base, 2
    while name in used:
        name = f"{base}_{k}"
        k += 1
    used.add(name)
    return name
