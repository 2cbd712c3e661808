import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abstf.interp import ExpectValue, TestCase
from abstf.lang import parse_program
from abstf.selection import FunctionDelta, SelectionReport
from abstf.trace_matrix import (
    MISSING_IMPLEMENTATION,
    MISSING_TEST,
    STALE_REQ_ON_CHANGE,
    UNTRACED_CODE,
    UNTRACED_TEST,
    Finding,
    Requirement,
    TraceMatrix,
    UnknownRequirement,
    build_matrix,
    check_completeness,
)

REQS = [Requirement("R1", "one"), Requirement("R2", "two")]


def _t(name, entry="f"):
    return TestCase(name, entry, (), ExpectValue(0))


def test_one_step_composition():
    prog = parse_program("#[req(R1)]\nfn f() { return 0; }")
    m = build_matrix([Requirement("R1")], prog, {"t": {"f": {(0, "E")}}})
    assert m.implements == {("f", "R1")}
    assert m.exercises == {("t", "f")}
    assert m.covers == {("t", "R1")}


def test_no_annotations():
    prog = parse_program("fn f() { return 0; }")
    m = build_matrix([], prog, {"t": {"f": {(0, "E")}}})
    assert m.implements == set() and m.covers == set()
    assert m.exercises == {("t", "f")}


def test_only_annotated_callee_covers():
    prog = parse_program("#[req(R1)]\nfn f() { return 0; } fn g() { return f(); }")
    m = build_matrix(REQS, prog, {"t": {"g": {(0, "E")}, "f": {(0, "E")}}})
    assert m.covers == {("t", "R1")}


def test_empty_trace_entries_do_not_exercise():
    prog = parse_program("fn f() { return 0; }")
    assert build_matrix([], prog, {"t": {"f": frozenset()}}).exercises == set()


def test_unknown_requirement():
    prog = parse_program("#[req(R9)]\nfn f() { return 0; }")
    with pytest.raises(UnknownRequirement):
        build_matrix(REQS, prog, {})


# one minimal corpus per rule

def test_missing_implementation_fires():
    prog = parse_program("#[req(R1)]\nfn f() { return 0; }")
    reqs = [Requirement("R1"), Requirement("R9")]
    m = build_matrix(reqs, prog, {"t": {"f": {(0, "E")}}})
    assert check_completeness(m, reqs, prog, [_t("t")]) == [
        Finding(MISSING_IMPLEMENTATION, "R9", "no function implements this requirement")
    ]


def test_untraced_code_fires():
    prog = parse_program("#[req(R1)]\nfn f() { return h(); } fn h() { return 0; }")
    m = build_matrix([Requirement("R1")], prog, {"t": {"f": {(0, "E")}, "h": {(0, "E")}}})
    assert [(f.kind, f.subject) for f in check_completeness(m, [Requirement("R1")], prog, [_t("t")])] == [
        (UNTRACED_CODE, "h")
    ]


def test_missing_test_fires():
    prog = parse_program("#[req(R1)]\nfn f() { return 0; } #[req(R2)]\nfn g() { return 0; }")
    m = build_matrix(REQS, prog, {"t": {"g": {(0, "E")}}})
    assert [(f.kind, f.subject) for f in check_completeness(m, REQS, prog, [_t("t", "g")])] == [
        (MISSING_TEST, "R1")
    ]


def test_untraced_test_fires():
    prog = parse_program("#[req(R1)]\nfn f() { return 0; }")
    req = [Requirement("R1")]
    m = build_matrix(req, prog, {"t": {"f": {(0, "E")}}, "u": {}})
    assert [(f.kind, f.subject) for f in check_completeness(m, req, prog, [_t("t"), _t("u", "nope")])] == [
        (UNTRACED_TEST, "u")
    ]


def test_stale_requirement_fires():
    prog = parse_program("#[req(R1)]\nfn f() { return 0; }")
    req = [Requirement("R1")]
    m = build_matrix(req, prog, {"t": {"f": {(0, "E")}}})
    delta = FunctionDelta(modified={"f"})
    found = check_completeness(m, req, prog, [_t("t")], delta, SelectionReport())
    assert [(f.kind, f.subject) for f in found] == [(STALE_REQ_ON_CHANGE, "R1")]
    assert check_completeness(m, req, prog, [_t("t")], delta, SelectionReport(selected={"t"})) == []


def test_fully_linked_corpus_is_silent():
    prog = parse_program("#[req(R1)]\nfn f() { return g(); } #[req(R2)]\nfn g() { return 0; }")
    m = build_matrix(REQS, prog, {"t": {"f": {(0, "E")}, "g": {(0, "E")}}})
    assert check_completeness(m, REQS, prog, [_t("t")]) == []


def test_findings_sorted():
    prog = parse_program("fn b() { return 0; } fn a() { return 0; }")
    reqs = [Requirement("R2"), Requirement("R1")]
    found = check_completeness(build_matrix(reqs, prog, {}), reqs, prog, [_t("z"), _t("y")])
    keys = [(f.kind, f.subject) for f in found]
    assert keys == sorted(keys)
    assert len(found) == 6


@st.composite
def relations(draw):
    fns = [f"f{i}" for i in range(draw(st.integers(1, 8)))]
    reqs = [f"R{i}" for i in range(draw(st.integers(0, 6)))]
    tests = [f"t{i}" for i in range(draw(st.integers(0, 8)))]
    annotations = {f: draw(st.sets(st.sampled_from(reqs))) if reqs else set() for f in fns}
    traces = {t: {f: {(0, "E")} for f in draw(st.sets(st.sampled_from(fns)))} for t in tests}
    return fns, reqs, annotations, traces


@settings(max_examples=200)
@given(relations())
def test_covers_is_exact_composition(rel):
    fns, reqs, annotations, traces = rel
    src = "\n".join(
        (f"#[req({','.join(sorted(annotations[f]))})]\n" if annotations[f] else "") + f"fn {f}() {{ return 0; }}"
        for f in fns
    )
    prog = parse_program(src)
    m = build_matrix([Requirement(r) for r in reqs], prog, traces)
    brute = set()
    for t, f in m.exercises:
        for f2, r in m.implements:
            if f == f2:
                brute.add((t, r))
    assert m.covers == brute
    assert m.implements == {(f, r) for f in fns for r in annotations[f]}
    assert isinstance(m, TraceMatrix)
