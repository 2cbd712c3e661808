import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abstf.corpus import random_program
from abstf.lang import (
    Binary,
    DuplicateFunction,
    If,
    IntLit,
    Let,
    ParseError,
    Unary,
    Var,
    canonical_label,
    parse_expr,
    parse_program,
    serialize_expr,
    serialize_program,
)


def test_minimal_program():
    prog = parse_program("fn main() { return 1; }")
    assert prog.names == ["main"]
    main = prog.functions[0]
    assert main.params == ()
    assert len(main.body) == 1


def test_annotation_reads_requirements():
    prog = parse_program("#[req(R1,R2)]\nfn f(x) { return x; }")
    assert prog.functions[0].reqs == {"R1", "R2"}


def test_multiple_annotations_accumulate():
    prog = parse_program("#[req(R1)]\n#[req(sec-2, R_3)]\nfn f() { return 0; }")
    assert prog.functions[0].reqs == {"R1", "sec-2", "R_3"}


def test_malformed_parameter_list():
    with pytest.raises(ParseError) as err:
        parse_program("fn f( {")
    assert err.value.line == 1
    assert "parameter or ')'" in err.value.message


@pytest.mark.parametrize("src, line, col", [
    ("fn f() {\n  return 1\n}", 3, 1),
    ("fn f() { let = 2; }", 1, 14),
    ("fn f() { return (1 + ; }", 1, 22),
    ("fn f() { return 1; }\nfn", 2, 3),
    ("fn f() { x = 99999999999999999999; }", 1, 14),
    ("fn f() { return 1 @ 2; }", 1, 19),
])
def test_parse_error_positions(src, line, col):
    with pytest.raises(ParseError) as err:
        parse_program(src)
    assert (err.value.line, err.value.col) == (line, col)


def test_duplicate_function():
    with pytest.raises(DuplicateFunction):
        parse_program("fn f() { return 1; } fn f() { return 2; }")


def test_duplicate_parameter():
    with pytest.raises(ParseError):
        parse_program("fn f(x, x) { return x; }")


def test_comments_dropped():
    a = parse_program("fn f() { // hello\n let x = 1; // there\n return x; }")
    b = parse_program("fn f() { let x = 1; return x; }")
    assert a == b


def test_label_whitespace_normalized():
    stmt = parse_program("fn f() { let  x =  1 ; }").functions[0].body[0]
    assert canonical_label(stmt) == "let x = 1;"


def test_label_if_shows_only_predicate():
    stmt = parse_program("fn f(x) { if x<2 { return 1; } }").functions[0].body[0]
    assert isinstance(stmt, If)
    assert canonical_label(stmt) == "if x < 2"
    while_stmt = parse_program("fn f(x) { while x>0 { x = x - 1; } }").functions[0].body[0]
    assert canonical_label(while_stmt) == "while x > 0"


def test_labels_ignore_inline_comments():
    a = parse_program("fn f() { let y = 3 + 4; }").functions[0].body[0]
    b = parse_program("fn f() { let y = 3 // note\n + 4; }").functions[0].body[0]
    assert canonical_label(a) == canonical_label(b)


def test_precedence_and_associativity():
    e = parse_expr("1 - 2 - 3")
    assert e == Binary("-", Binary("-", IntLit(1), IntLit(2)), IntLit(3))
    e = parse_expr("1 + 2 * 3 < 4 && !x || y")
    assert e.op == "||"
    assert e.lhs.op == "&&"
    assert e.lhs.lhs.op == "<"
    assert serialize_expr(parse_expr("(1 + 2) * 3")) == "(1 + 2) * 3"
    assert serialize_expr(parse_expr("1 - (2 - 3)")) == "1 - (2 - 3)"
    assert serialize_expr(parse_expr("-(a + b)")) == "-(a + b)"
    assert serialize_expr(parse_expr("- -a")) == "--a"


def test_body_hash_ignores_layout_not_content():
    a = parse_program("fn f(x) { return x + 1; }").functions[0]
    b = parse_program("fn f(x)\n{\n    return x+1;  // same\n}").functions[0]
    c = parse_program("fn f(x) { return x + 2; }").functions[0]
    assert a.body_hash == b.body_hash
    assert a.body_hash != c.body_hash


def test_spans_recorded():
    prog = parse_program("fn f() {\n  let x = 1;\n  return x;\n}")
    ret = prog.functions[0].body[1]
    assert (ret.line, ret.col) == (3, 3)
    assert (ret.value.line, ret.value.col) == (3, 10)


# -- properties -----------------------------------------------------------------

names = st.sampled_from(["a", "b", "x", "y1"])
leaves = st.one_of(st.integers(0, 2**63 - 1).map(IntLit), names.map(Var))
exprs = st.recursive(
    leaves,
    lambda kids: st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "&&", "||"]),
                  kids, kids).map(lambda t: Binary(*t)),
        st.tuples(st.sampled_from(["-", "!"]), kids).map(lambda t: Unary(*t)),
    ),
    max_leaves=12,
)


@given(exprs)
def test_expression_round_trip(e):
    assert parse_expr(serialize_expr(e)) == e


@given(exprs)
def test_label_is_single_line_and_pure(e):
    stmt = Let("v", e)
    label = canonical_label(stmt)
    assert "\n" not in label
    assert label == canonical_label(Let("v", parse_expr(serialize_expr(e))))


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_program_round_trip(seed):
    prog = random_program(random.Random(seed))
    text = serialize_program(prog)
    once = parse_program(text)
    assert once == prog
    assert parse_program(serialize_program(once)) == once


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_body_hash_follows_labels(seed):
    prog = parse_program(serialize_program(random_program(random.Random(seed))))
    reparsed = parse_program(serialize_program(prog))
    for a, b in zip(prog.functions, reparsed.functions):
        assert [canonical_label(s) for s in a.body] == [canonical_label(s) for s in b.body]
        assert a.body_hash == b.body_hash
