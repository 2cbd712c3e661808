import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abstf.cfg import build_call_graph, build_cfg, build_cfgs
from abstf.corpus import MUTATION_KINDS, mutate_n, random_program, random_suite
from abstf.interp import ExpectValue, TestCase, execute_suite
from abstf.lang import parse_program, serialize_program
from abstf.selection import (
    FunctionDelta,
    SelectionReport,
    TraceVersionMismatch,
    compare_cfgs,
    dangerous_edges,
    diff_programs,
    map_edges_to_new,
    select_tests,
)


def cfg_of(src):
    return build_cfg(parse_program(src).functions[0])


def test_self_diff_empty():
    g = cfg_of("fn f(x) { if x { return 1; } while x { x = x - 1; } return 2; }")
    assert compare_cfgs(g, g) == set()


def test_changed_return_marks_entry_edge():
    # Entry -E-> "return 1;" vs "return 2;": labels differ at the first step.
    assert compare_cfgs(cfg_of("fn f() { return 1; }"), cfg_of("fn f() { return 2; }")) == {(0, "E")}


def test_only_else_branch_changed():
    old = cfg_of("fn f(x) { if x { return 1; } else { return 2; } }")
    new = cfg_of("fn f(x) { if x { return 1; } else { return 3; } }")
    # Predicate is node 1; its T successor matches, its F successor does not.
    assert compare_cfgs(old, new) == {(1, "F")}


def test_insertion_is_not_positional():
    old = cfg_of("fn f(x) { let a = 1; if x { return a; } return 0; }")
    new = cfg_of("fn f(x) { let a = 1; if x { let b = 2; return a; } return 0; }")
    assert compare_cfgs(old, new) == {(2, "T")}
    # the untouched F branch maps although node ids stay aligned only up to the insert
    assert map_edges_to_new(old, new, {(2, "F"), (2, "T")}) == {(2, "F"), (2, "T")}


def test_removed_else_branch():
    old = cfg_of("fn f(x) { if x { x = 1; } else { x = 2; } return x; }")
    new = cfg_of("fn f(x) { if x { x = 1; } return x; }")
    assert compare_cfgs(old, new) == {(1, "F")}


def test_loop_body_change():
    old = cfg_of("fn f(x) { while x > 0 { x = x - 1; } return x; }")
    new = cfg_of("fn f(x) { while x > 0 { x = x - 2; } return x; }")
    assert compare_cfgs(old, new) == {(1, "T")}


def test_predicate_change():
    old = cfg_of("fn f(x) { if x < 2 { return 1; } return 0; }")
    new = cfg_of("fn f(x) { if x <= 2 { return 1; } return 0; }")
    assert compare_cfgs(old, new) == {(0, "E")}


def test_kind_mismatch_with_same_text_is_dangerous():
    old = cfg_of("fn f(x) { if x { return 1; } return 0; }")
    new = cfg_of("fn f(x) { while x { return 1; } return 0; }")
    assert compare_cfgs(old, new) == {(0, "E")}


def test_delta_classification():
    old = parse_program("fn a() { return 1; } fn b(x) { return x; } fn c() { return 3; } fn d(x) { return x; }")
    new = parse_program("fn a() { return 1; } fn b(x) { return x + 1; } fn e() { return 5; } fn d(y) { return x; }")
    delta = diff_programs(old, new)
    assert delta.unchanged == {"a"}
    assert delta.modified == {"b", "d"}
    assert delta.signature_changed == {"d"}
    assert delta.added == {"e"}
    assert delta.deleted == {"c"}


def test_param_change_marks_all_edges():
    old = parse_program("fn d(x) { if x { return 1; } return x; }")
    new = parse_program("fn d(y) { if x { return 1; } return x; }")
    delta = diff_programs(old, new)
    dang = dangerous_edges(build_cfgs(old), build_cfgs(new), delta)
    assert dang == {"d": build_cfg(old.functions[0]).edge_keys()}


def test_select_none_without_changes():
    report = select_tests(FunctionDelta(unchanged={"f"}), {}, {"t": {"f": {(0, "E")}}})
    assert report.selected == set()
    assert report.reasons == {}


def test_select_on_dangerous_hit():
    delta = FunctionDelta(modified={"f"})
    traces = {"t1": {"f": {(0, "E"), (1, "T")}}, "t2": {"f": {(0, "E"), (1, "F")}}}
    report = select_tests(delta, {"f": {(1, "F")}}, traces)
    assert report.selected == {"t2"}
    assert report.reasons == {"t2": [{"function": "f", "edge": [1, "F"]}]}


def test_select_on_deleted_function():
    delta = FunctionDelta(deleted={"f"}, unchanged={"main"})
    traces = {"t": {"main": {(0, "E")}, "f": {(0, "E"), (1, "E")}}, "u": {"main": {(0, "E")}}}
    report = select_tests(delta, {}, traces)
    assert report.selected == {"t"}
    assert report.reasons["t"] == [{"deleted": "f"}]


def test_added_functions_reported():
    report = select_tests(FunctionDelta(added={"g"}), {}, {})
    assert report.new_functions_needing_tests == {"g"}
    assert report.to_dict() == {"selected": [], "reasons": {}, "added": ["g"]}


def test_trace_version_mismatch():
    prog = parse_program("fn f() { return 1; }")
    cfgs = build_cfgs(prog)
    with pytest.raises(TraceVersionMismatch):
        select_tests(FunctionDelta(), {}, {"t": {"f": {(7, "T")}}}, build_call_graph(prog), cfgs)
    with pytest.raises(TraceVersionMismatch):
        select_tests(FunctionDelta(), {}, {"t": {"zzz": {(0, "E")}}}, build_call_graph(prog), cfgs)


def test_report_json_round_trip():
    report = SelectionReport({"t"}, {"t": [{"function": "f", "edge": [1, "F"]}]}, False, {"g"})
    assert SelectionReport.from_dict(report.to_dict()) == report


def test_callee_change_does_not_taint_caller():
    old = parse_program("fn f(x) { return x; } fn main(x) { return f(x) + 1; }")
    new = parse_program("fn f(x) { return x + 1; } fn main(x) { return f(x) + 1; }")
    delta = diff_programs(old, new)
    dang = dangerous_edges(build_cfgs(old), build_cfgs(new), delta, build_call_graph(old))
    assert set(dang) == {"f"}


def _select(old_src, new_src, tests, step_limit=10_000):
    old, new = parse_program(old_src), parse_program(new_src)
    oc, nc = build_cfgs(old), build_cfgs(new)
    before = execute_suite(old, oc, tests, step_limit)
    after = execute_suite(new, nc, tests, step_limit)
    delta = diff_programs(old, new)
    dang = dangerous_edges(oc, nc, delta, build_call_graph(old),
                           {f.name: f.arity for f in old.functions}, {f.name: f.arity for f in new.functions})
    report = select_tests(delta, dang, {r.test.name: r.trace for r in before}, build_call_graph(old), oc,
                          {t.name: t.entry for t in tests})
    changed = {a.test.name for a, b in zip(before, after) if a.outcome != b.outcome}
    return report, changed


def test_defining_previously_undefined_callee_selects_callers():
    tests = [TestCase("t", "main", (), ExpectValue(1)), TestCase("u", "other", (), ExpectValue(2))]
    report, changed = _select(
        "fn main() { return helper(); } fn other() { return 2; }",
        "fn main() { return helper(); } fn other() { return 2; } fn helper() { return 1; }",
        tests,
    )
    assert changed == {"t"}
    assert report.selected == {"t"}


def test_arity_change_selects_mismatched_callers():
    tests = [TestCase("t", "main", (), ExpectValue(1))]
    report, changed = _select(
        "fn g(a, b) { return a; } fn main() { return g(1); }",
        "fn g(a) { return a; } fn main() { return g(1); }",
        tests,
    )
    assert changed == {"t"} <= report.selected


def test_added_entry_selected():
    tests = [TestCase("t", "late", (), ExpectValue(4))]
    report, changed = _select("fn a() { return 1; }", "fn a() { return 1; } fn late() { return 4; }", tests)
    assert changed == {"t"}
    assert report.reasons["t"] == [{"added_entry": "late"}]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**7))
def test_safety_against_execution_oracle(seed):
    rng = random.Random(seed)
    old = random_program(rng)
    suite = random_suite(old, rng, rng.randint(10, 30))
    new, _ = mutate_n(old, rng, rng.randint(1, 3), MUTATION_KINDS + ("params",))
    new = parse_program(serialize_program(new))
    oc, nc = build_cfgs(old), build_cfgs(new)
    before = execute_suite(old, oc, suite, 5000)
    after = execute_suite(new, nc, suite, 5000)
    delta = diff_programs(old, new)
    dang = dangerous_edges(oc, nc, delta, build_call_graph(old),
                           {f.name: f.arity for f in old.functions}, {f.name: f.arity for f in new.functions})
    report = select_tests(delta, dang, {r.test.name: r.trace for r in before}, build_call_graph(old), oc,
                          {t.name: t.entry for t in suite})
    changed = {a.test.name for a, b in zip(before, after) if a.outcome != b.outcome}
    assert changed <= report.selected
    assert report.selected == {t for t, why in report.reasons.items() if why}
    for fn, edges in dang.items():
        assert edges <= oc[fn].edge_keys()


@settings(max_examples=60)
@given(st.integers(0, 10**7))
def test_self_diff_neutral_and_bounded(seed):
    prog = random_program(random.Random(seed))
    for fn in prog.functions:
        g = build_cfg(fn)
        assert compare_cfgs(g, g) == set()
        live = _reachable(g)
        live_keys = {(s, l) for s, l in g.edge_keys() if s in live}
        assert map_edges_to_new(g, g, g.edge_keys()) == live_keys


def _reachable(g):
    seen, stack = {g.entry_id}, [g.entry_id]
    while stack:
        for e in g.out_edges(stack.pop()):
            if e.dst not in seen:
                seen.add(e.dst)
                stack.append(e.dst)
    return seen
