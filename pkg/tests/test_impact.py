from hypothesis import given, settings
from hypothesis import strategies as st

from abstf.cfg import CallGraph, CallSite, build_call_graph
from abstf.impact import ImpactReport, compute_impact
from abstf.lang import parse_program
from abstf.selection import FunctionDelta


def brute_impacted(graph: CallGraph, target: str) -> set:
    """Fixpoint: keep adding any caller of a member until nothing changes."""
    members = {target}
    while True:
        grown = members | {s.caller for s in graph.call_sites if s.callee in members}
        if grown == members:
            return members
        members = grown


def test_isolated_root():
    cg = build_call_graph(parse_program("fn main() { return 1; }"))
    report = compute_impact(FunctionDelta(modified={"main"}), cg)
    entry = report.entries["main"]
    assert entry.call_sites == 0
    assert entry.impacted == {"main"}


def test_two_sites_through_chain():
    prog = parse_program(
        "fn f(x) { return x; } fn g() { return f(1) + f(2); } fn main() { return g(); }"
    )
    report = compute_impact(FunctionDelta(modified={"f"}), build_call_graph(prog))
    assert report.entries["f"].call_sites == 2
    assert report.entries["f"].impacted == {"f", "g", "main"}


def test_mutual_recursion():
    prog = parse_program(
        "fn a(n) { if n { return b(n - 1); } return 0; } fn b(n) { return a(n); }"
    )
    report = compute_impact(FunctionDelta(modified={"a"}), build_call_graph(prog))
    assert report.entries["a"].impacted == {"a", "b"}
    assert report.entries["a"].call_sites == 1


def test_self_calls_not_counted():
    prog = parse_program("fn f(n) { if n { return f(n - 1) + f(n - 2); } return 0; }")
    report = compute_impact(FunctionDelta(modified={"f"}), build_call_graph(prog))
    assert report.entries["f"].call_sites == 0
    assert report.entries["f"].impacted == {"f"}


def test_deleted_measured_on_old_graph():
    old = build_call_graph(parse_program("fn h() { return 1; } fn main() { return h(); }"))
    new = build_call_graph(parse_program("fn main() { return h(); }"))
    report = compute_impact(FunctionDelta(deleted={"h"}, unchanged={"main"}), new, old)
    assert report.entries["h"].call_sites == 1
    assert report.entries["h"].impacted == {"h", "main"}


def test_ranking_and_json():
    prog = parse_program(
        "fn a() { return 0; } fn b() { return 0; } fn c() { return a() + b() + b(); }"
    )
    report = compute_impact(FunctionDelta(modified={"a", "b", "c"}), build_call_graph(prog))
    assert report.ranking == ["b", "a", "c"]
    d = report.to_dict()
    assert d["impact"][0] == {"function": "b", "call_sites": 2, "impacted": ["b", "c"]}
    assert ImpactReport.from_dict(d).to_dict() == d


@st.composite
def call_graphs(draw):
    n = draw(st.integers(1, 50))
    names = [f"n{i}" for i in range(n)]
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=120))
    sites, ordinal = [], {}
    for a, b in edges:
        caller = names[a]
        sites.append(CallSite(caller, names[b], ordinal.get(caller, 0)))
        ordinal[caller] = ordinal.get(caller, 0) + 1
    return CallGraph(names, sites)


@settings(max_examples=100)
@given(call_graphs(), st.data())
def test_matches_brute_force(graph, data):
    changed = set(data.draw(st.lists(st.sampled_from(graph.nodes), min_size=1, max_size=5)))
    report = compute_impact(FunctionDelta(modified=changed), graph)
    for f in changed:
        assert report.entries[f].impacted == brute_impacted(graph, f)
        assert report.entries[f].call_sites == sum(
            1 for s in graph.call_sites if s.callee == f and s.caller != f
        )
    ranks = [(-report.entries[f].call_sites, f) for f in report.ranking]
    assert ranks == sorted(ranks)
