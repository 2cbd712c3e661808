"""Deterministic MiniLang interpreter with CFG edge tracing.

Execution walks each function's CFG directly, so every recorded edge key is
by construction an edge of that CFG.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .cfg import EXIT, PREDICATE, Cfg, build_cfgs
from .lang import (
    INT_MAX,
    INT_MIN,
    Assign,
    Binary,
    Call,
    ExprStmt,
    IntLit,
    Let,
    Program,
    Return,
    Unary,
    Var,
)

DEFAULT_STEP_LIMIT = 1_000_000
# Nested MiniLang calls beyond this depth are reported as resource exhaustion.
MAX_CALL_DEPTH = 400

PASS, FAIL, ERROR = "pass", "fail", "error"
ERROR_KINDS = (
    "div_by_zero",
    "overflow",
    "step_limit",
    "undefined_function",
    "arity_mismatch",
    "missing_return",
    "undefined_variable",
)


class SuiteError(ValueError):
    """Malformed suite manifest."""


@dataclass(frozen=True)
class ExpectValue:
    value: int


@dataclass(frozen=True)
class ExpectError:
    pass


Expected = Union[ExpectValue, ExpectError]


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # keep pytest from collecting this class

    name: str
    entry: str
    args: tuple
    expected: Expected = ExpectError()

    def to_dict(self) -> dict:
        exp = {"value": self.expected.value} if isinstance(self.expected, ExpectValue) else "error"
        return {"name": self.name, "entry": self.entry, "args": list(self.args), "expected": exp}

    @classmethod
    def from_dict(cls, data: dict) -> "TestCase":
        try:
            exp = data["expected"]
            if exp == "error":
                expected = ExpectError()
            elif isinstance(exp, dict) and isinstance(exp.get("value"), int):
                expected = ExpectValue(exp["value"])
            else:
                raise SuiteError(f"test {data.get('name')!r}: bad expected {exp!r}")
            args = tuple(data.get("args", ()))
            if not all(isinstance(a, int) and INT_MIN <= a <= INT_MAX for a in args):
                raise SuiteError(f"test {data['name']!r}: args must be 64-bit integers")
            return cls(data["name"], data["entry"], args, expected)
        except KeyError as exc:
            raise SuiteError(f"test entry missing field {exc}") from None


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    status: str
    value: Optional[int] = None
    error_kind: Optional[str] = None

    @property
    def observed(self) -> tuple:
        """What the program did, independent of what the test expected."""
        return (self.value, self.error_kind)


@dataclass
class TestResult:
    __test__ = False

    test: TestCase
    outcome: TestOutcome
    trace: dict = field(default_factory=dict)


class _Abort(Exception):
    def __init__(self, kind: str):
        self.kind = kind


class _Machine:
    def __init__(self, prog: Program, cfgs: dict, step_limit: int):
        self.fns = prog.by_name
        self.cfgs = cfgs
        self.step_limit = step_limit
        self.steps = 0
        self.depth = 0
        self.trace: dict = {}

    def call(self, name: str, args: list) -> int:
        fn = self.fns.get(name)
        if fn is None:
            raise _Abort("undefined_function")
        if len(args) != len(fn.params):
            raise _Abort("arity_mismatch")
        if self.depth >= MAX_CALL_DEPTH:
            raise _Abort("step_limit")
        cfg: Cfg = self.cfgs[name]
        env = dict(zip(fn.params, args))
        edges = self.trace.setdefault(name, set())
        self.depth += 1
        try:
            node, label = cfg.entry_id, "E"
            while True:
                edges.add((node, label))
                node = cfg.successor(node, label)
                target = cfg.nodes[node]
                if target.kind == EXIT:
                    raise _Abort("missing_return")
                self.steps += 1
                if self.steps > self.step_limit:
                    raise _Abort("step_limit")
                stmt = target.stmt
                if target.kind == PREDICATE:
                    label = "T" if self.eval(stmt.cond, env) != 0 else "F"
                elif isinstance(stmt, Return):
                    value = self.eval(stmt.value, env)
                    edges.add((node, "E"))
                    return value
                else:
                    if isinstance(stmt, (Let, Assign)):
                        if isinstance(stmt, Assign) and stmt.name not in env:
                            raise _Abort("undefined_variable")
                        env[stmt.name] = self.eval(stmt.value, env)
                    elif isinstance(stmt, ExprStmt):
                        self.eval(stmt.expr, env)
                    label = "E"
        finally:
            self.depth -= 1

    def eval(self, e, env: dict) -> int:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, Var):
            try:
                return env[e.name]
            except KeyError:
                raise _Abort("undefined_variable") from None
        if isinstance(e, Binary):
            op = e.op
            if op == "&&":
                return 1 if self.eval(e.lhs, env) != 0 and self.eval(e.rhs, env) != 0 else 0
            if op == "||":
                return 1 if self.eval(e.lhs, env) != 0 or self.eval(e.rhs, env) != 0 else 0
            a = self.eval(e.lhs, env)
            b = self.eval(e.rhs, env)
            return _binop(op, a, b)
        if isinstance(e, Unary):
            v = self.eval(e.operand, env)
            if e.op == "!":
                return 1 if v == 0 else 0
            return _checked(-v)
        if isinstance(e, Call):
            args = [self.eval(a, env) for a in e.args]
            return self.call(e.name, args)
        raise TypeError(f"not an expression: {e!r}")


def _checked(v: int) -> int:
    if v < INT_MIN or v > INT_MAX:
        raise _Abort("overflow")
    return v


def _binop(op: str, a: int, b: int) -> int:
    if op == "+":
        return _checked(a + b)
    if op == "-":
        return _checked(a - b)
    if op == "*":
        return _checked(a * b)
    if op in ("/", "%"):
        if b == 0:
            raise _Abort("div_by_zero")
        # Truncating division, remainder takes the dividend's sign.
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        if op == "/":
            return _checked(q)
        return a - q * b
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    raise ValueError(f"unknown operator {op!r}")


def _judge(expected: Expected, value: Optional[int], error_kind: Optional[str]) -> TestOutcome:
    if error_kind is not None:
        status = PASS if isinstance(expected, ExpectError) else ERROR
        return TestOutcome(status, None, error_kind)
    ok = isinstance(expected, ExpectValue) and expected.value == value
    return TestOutcome(PASS if ok else FAIL, value, None)


def run_test(prog: Program, cfgs: dict, test: TestCase, step_limit: int = DEFAULT_STEP_LIMIT):
    """Execute one test; returns ``(TestOutcome, trace)``.

    The trace maps function name to the set of ``(src, label)`` edge keys
    traversed. Subject-program failures never escape as exceptions.
    """
    m = _Machine(prog, cfgs, step_limit)
    needed = MAX_CALL_DEPTH * 10 + 2000
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)
    try:
        value = m.call(test.entry, list(test.args))
        outcome = _judge(test.expected, value, None)
    except _Abort as exc:
        outcome = _judge(test.expected, None, exc.kind)
    except RecursionError:
        outcome = _judge(test.expected, None, "step_limit")
    trace = {fn: frozenset(edges) for fn, edges in m.trace.items() if edges}
    return outcome, trace


def execute_suite(prog: Program, cfgs: Optional[dict], suite, step_limit: int = DEFAULT_STEP_LIMIT) -> list:
    """Run every test in declared order, each in a fresh machine."""
    names = [t.name for t in suite]
    if len(set(names)) != len(names):
        raise SuiteError("test names must be unique")
    if cfgs is None:
        cfgs = build_cfgs(prog)
    results = []
    for test in suite:
        outcome, trace = run_test(prog, cfgs, test, step_limit)
        results.append(TestResult(test, outcome, trace))
    return results


# --------------------------------------------------------------------------- manifests


def load_suite(path, prog: Optional[Program] = None) -> list:
    """Read a ``tests.json`` manifest, checking entry arity against ``prog``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return suite_from_dict(data, prog)


def suite_from_dict(data: dict, prog: Optional[Program] = None) -> list:
    if not isinstance(data, dict) or not isinstance(data.get("tests"), list):
        raise SuiteError('suite manifest must be {"tests": [...]}')
    suite = [TestCase.from_dict(t) for t in data["tests"]]
    names = [t.name for t in suite]
    if len(set(names)) != len(names):
        raise SuiteError("test names must be unique")
    if prog is not None:
        fns = prog.by_name
        for t in suite:
            fn = fns.get(t.entry)
            if fn is not None and fn.arity != len(t.args):
                raise SuiteError(f"test {t.name!r}: {t.entry} takes {fn.arity} args, got {len(t.args)}")
    return suite


def suite_to_dict(suite) -> dict:
    return {"tests": [t.to_dict() for t in suite]}


def trace_record(name: str, outcome: TestOutcome, trace: dict) -> dict:
    """One ``traces.json`` line, edge keys sorted."""
    rec = {"test": name, "outcome": outcome.status, "value": outcome.value}
    if outcome.error_kind is not None:
        rec["error"] = outcome.error_kind
    rec["edges"] = {fn: [[s, l] for s, l in sorted(edges)] for fn, edges in sorted(trace.items())}
    return rec


def parse_trace_record(rec: dict):
    outcome = TestOutcome(rec["outcome"], rec.get("value"), rec.get("error"))
    trace = {fn: frozenset((s, l) for s, l in edges) for fn, edges in rec["edges"].items()}
    return rec["test"], outcome, trace
