"""Random MiniLang programs, mutations and suites for differential checking.

Programs are built so that most executions terminate quickly: callees have
lower index than callers (plus guarded self-recursion on a decreasing first
parameter), and loops are counted with a private counter. Mutations may
break those guarantees; the interpreter's step limit keeps runs bounded.
"""

from __future__ import annotations

import json
import random
from dataclasses import replace
from pathlib import Path

from .interp import ExpectError, ExpectValue, TestCase, execute_suite
from .lang import (
    Assign,
    Binary,
    Call,
    ExprStmt,
    FunctionDef,
    If,
    IntLit,
    Let,
    Program,
    Return,
    Unary,
    Var,
    While,
    serialize_function,
)

PARAM_NAMES = ("a", "b", "c")
GHOST = "ghost"
MUTATION_KINDS = ("constant", "operator", "insert", "delete", "swap", "add_function", "delete_function")

_FLIPS = {
    "+": "-", "-": "+", "*": "+", "/": "*", "%": "/",
    "<": "<=", "<=": "<", ">": ">=", ">=": ">", "==": "!=", "!=": "==",
    "&&": "||", "||": "&&",
}


class ProgramGenerator:
    def __init__(self, rng: random.Random, ghost_rate: float = 0.05):
        self.rng = rng
        self.ghost_rate = ghost_rate
        self.arity: dict = {}
        self.counter = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    # expressions
    def expr(self, scope: list, callees: list, depth: int = 0, calls: list = None) -> object:
        r = self.rng.random()
        if depth >= 2 or r < 0.35:
            if scope and self.rng.random() < 0.6:
                return Var(self.rng.choice(scope))
            return IntLit(self.rng.randint(0, 6))
        if r < 0.45 and calls is not None and calls[0] > 0 and callees:
            calls[0] -= 1
            name = self.rng.choice(callees)
            if self.rng.random() < self.ghost_rate:
                name = GHOST
            n = self.arity.get(name, self.rng.randint(0, 2))
            self.arity.setdefault(name, n)
            return Call(name, tuple(self.expr(scope, [], depth + 1) for _ in range(n)))
        if r < 0.52:
            return Unary(self.rng.choice("-!"), self.expr(scope, callees, depth + 1, calls))
        op = self.rng.choice(["+", "-", "*", "+", "-", "<", "<=", ">", "==", "!=", "&&", "||", "/", "%"])
        return Binary(op, self.expr(scope, callees, depth + 1, calls), self.expr(scope, callees, depth + 1, calls))

    # statements
    def block(self, scope: list, assignable: list, callees: list, depth: int, calls: list, size: int) -> list:
        scope = list(scope)
        assignable = list(assignable)
        out = []
        for _ in range(size):
            r = self.rng.random()
            if depth < 2 and r < 0.2:
                then = self.block(scope, assignable, callees, depth + 1, calls, self.rng.randint(0, 2))
                orelse = None
                if self.rng.random() < 0.6:
                    orelse = tuple(self.block(scope, assignable, callees, depth + 1, calls, self.rng.randint(0, 2)))
                out.append(If(self.expr(scope, callees, 0, calls), tuple(then), orelse))
            elif depth < 2 and r < 0.32:
                k = self.fresh("k")
                out.append(Let(k, IntLit(0)))
                body = self.block(scope + [k], assignable, callees, depth + 1, calls, self.rng.randint(0, 2))
                body.append(Assign(k, Binary("+", Var(k), IntLit(1))))
                bound = IntLit(self.rng.randint(0, 3))
                out.append(While(Binary("<", Var(k), bound), tuple(body)))
            elif r < 0.55 or not assignable:
                v = self.fresh("v")
                out.append(Let(v, self.expr(scope, callees, 0, calls)))
                scope.append(v)
                assignable.append(v)
            elif r < 0.8:
                out.append(Assign(self.rng.choice(assignable), self.expr(scope, callees, 0, calls)))
            elif r < 0.88 and callees and calls[0] > 0:
                calls[0] -= 1
                name = self.rng.choice(callees)
                out.append(ExprStmt(Call(name, tuple(IntLit(self.rng.randint(0, 3))
                                                     for _ in range(self.arity[name])))))
            else:
                out.append(Return(self.expr(scope, callees, 0, calls)))
        return out

    def function(self, name: str, callees: list, reqs=frozenset()) -> FunctionDef:
        n = self.rng.randint(0, 2) if name not in self.arity else self.arity[name]
        self.arity[name] = n
        params = PARAM_NAMES[:n]
        calls = [2]
        body = []
        recursive = n >= 1 and self.rng.random() < 0.3
        if recursive:
            body.append(If(Binary("<=", Var(params[0]), IntLit(0)), (Return(IntLit(self.rng.randint(0, 5))),)))
        body += self.block(list(params), [], callees, 0, calls, self.rng.randint(1, 4))
        ret = self.expr(list(params), callees, 0, calls)
        if recursive:
            rec = Call(name, (Binary("-", Var(params[0]), IntLit(1)),) + tuple(
                self.expr(list(params), [], 1) for _ in range(n - 1)))
            ret = Binary("+", rec, ret)
        body.append(Return(ret))
        return FunctionDef(name, params, tuple(body), frozenset(reqs))

    def program(self, n_functions: int, reqs_per_fn=None) -> Program:
        fns = []
        for i in range(n_functions):
            name = f"f{i}"
            callees = [f"f{j}" for j in range(max(0, i - 4), i)]
            reqs = reqs_per_fn(i) if reqs_per_fn else frozenset()
            fns.append(self.function(name, callees, reqs))
        return Program(tuple(fns))


def random_program(rng: random.Random, min_fns: int = 3, max_fns: int = 15, **kw) -> Program:
    return ProgramGenerator(rng, **kw).program(rng.randint(min_fns, max_fns))


# --------------------------------------------------------------------------- mutation


def _map_blocks(stmts: tuple, fn, counter: list):
    """Apply ``fn`` to the ``counter[0]``-th block (pre-order); returns the rebuilt block."""
    idx = counter[1]
    counter[1] += 1
    if idx == counter[0]:
        return tuple(fn(list(stmts)))
    out = []
    for s in stmts:
        if isinstance(s, If):
            then = _map_blocks(s.then, fn, counter)
            orelse = _map_blocks(s.orelse, fn, counter) if s.orelse is not None else None
            s = replace(s, then=then, orelse=orelse)
        elif isinstance(s, While):
            s = replace(s, body=_map_blocks(s.body, fn, counter))
        out.append(s)
    return tuple(out)


def _count_blocks(stmts) -> int:
    n = 1
    for s in stmts:
        if isinstance(s, If):
            n += _count_blocks(s.then) + (_count_blocks(s.orelse) if s.orelse is not None else 0)
        elif isinstance(s, While):
            n += _count_blocks(s.body)
    return n


def _rewrite_expr(e, pick, state: list):
    """Pre-order expression rewrite: ``pick(e)`` returns a replacement or None."""
    if pick(e, state) is not None:
        return pick.result
    if isinstance(e, Binary):
        return replace(e, lhs=_rewrite_expr(e.lhs, pick, state), rhs=_rewrite_expr(e.rhs, pick, state))
    if isinstance(e, Unary):
        return replace(e, operand=_rewrite_expr(e.operand, pick, state))
    if isinstance(e, Call):
        return replace(e, args=tuple(_rewrite_expr(a, pick, state) for a in e.args))
    return e


def _rewrite_stmt_exprs(s, pick, state):
    if isinstance(s, (Let, Assign, Return)):
        return replace(s, value=_rewrite_expr(s.value, pick, state))
    if isinstance(s, ExprStmt):
        return replace(s, expr=_rewrite_expr(s.expr, pick, state))
    if isinstance(s, If):
        return replace(
            s,
            cond=_rewrite_expr(s.cond, pick, state),
            then=tuple(_rewrite_stmt_exprs(x, pick, state) for x in s.then),
            orelse=None if s.orelse is None else tuple(_rewrite_stmt_exprs(x, pick, state) for x in s.orelse),
        )
    if isinstance(s, While):
        return replace(s, cond=_rewrite_expr(s.cond, pick, state),
                       body=tuple(_rewrite_stmt_exprs(x, pick, state) for x in s.body))
    return s


class _Pick:
    """Selects the ``target``-th expression matching ``kind`` and rewrites it."""

    def __init__(self, kind, target, make):
        self.kind, self.target, self.make = kind, target, make
        self.result = None

    def __call__(self, e, state):
        if isinstance(e, self.kind):
            state[0] += 1
            if state[0] - 1 == self.target:
                self.result = self.make(e)
                return self.result
        return None


def _exprs_of_kind(fn: FunctionDef, kind) -> int:
    probe = _Pick(kind, -1, lambda e: e)
    state = [0]
    for s in fn.body:
        _rewrite_stmt_exprs(s, probe, state)
    return state[0]


def _with_fn(prog: Program, fn: FunctionDef) -> Program:
    return Program(tuple(fn if f.name == fn.name else f for f in prog.functions), prog.source_path)


def mutate(prog: Program, rng: random.Random, kind: str) -> Program:
    """Apply one mutation of ``kind``; returns ``prog`` unchanged if it does not apply."""
    fns = list(prog.functions)
    if not fns:
        return prog
    fn = rng.choice(fns)
    if kind in ("constant", "operator"):
        node_kind = IntLit if kind == "constant" else Binary
        total = _exprs_of_kind(fn, node_kind)
        if total == 0:
            return prog
        if kind == "constant":
            make = lambda e: IntLit(max(0, e.value + rng.choice([-2, -1, 1, 2, 3])))  # noqa: E731
        else:
            make = lambda e: replace(e, op=_FLIPS[e.op])  # noqa: E731
        pick = _Pick(node_kind, rng.randrange(total), make)
        state = [0]
        body = tuple(_rewrite_stmt_exprs(s, pick, state) for s in fn.body)
        return _with_fn(prog, replace(fn, body=body))
    if kind in ("insert", "delete", "swap"):
        nblocks = _count_blocks(fn.body)
        target = rng.randrange(nblocks)

        def edit(stmts):
            if kind == "insert":
                scope = list(fn.params)
                choice = rng.random()
                if choice < 0.4:
                    new = Return(IntLit(rng.randint(0, 9)))
                elif choice < 0.7 or not scope:
                    new = Let(f"z{rng.randint(0, 99)}", Binary("+", IntLit(rng.randint(0, 5)),
                                                               Var(scope[0]) if scope else IntLit(1)))
                else:
                    new = If(Binary(">", Var(scope[0]), IntLit(rng.randint(-2, 2))),
                             (Return(IntLit(rng.randint(0, 9))),))
                stmts.insert(rng.randint(0, len(stmts)), new)
            elif kind == "delete" and stmts:
                del stmts[rng.randrange(len(stmts))]
            elif kind == "swap":
                ifs = [i for i, s in enumerate(stmts) if isinstance(s, If)]
                if ifs:
                    i = rng.choice(ifs)
                    s = stmts[i]
                    stmts[i] = replace(s, then=s.orelse or (), orelse=s.then)
            return stmts

        body = _map_blocks(fn.body, edit, [target, 0])
        return _with_fn(prog, replace(fn, body=body))
    if kind == "add_function":
        gen = ProgramGenerator(rng)
        gen.arity = {f.name: f.arity for f in fns}
        calls_ghost = GHOST not in gen.arity and any(
            isinstance(e, Call) and e.name == GHOST
            for f in fns for s in f.body for e in _iter_all(s)
        )
        name = GHOST if calls_ghost and rng.random() < 0.7 else f"g{rng.randint(0, 999)}"
        if name in gen.arity and name != GHOST:
            return prog
        if name == GHOST:
            gen.arity.pop(GHOST, None)
            gen.arity[GHOST] = _ghost_arity(fns) if rng.random() < 0.7 else rng.randint(0, 2)
        new_fn = gen.function(name, [f.name for f in rng.sample(fns, min(2, len(fns)))])
        out = fns + [new_fn]
        if name != GHOST and rng.random() < 0.6:
            host = rng.choice(fns)
            call = Let(f"w{rng.randint(0, 99)}", Call(name, tuple(IntLit(1) for _ in range(new_fn.arity))))
            body = list(host.body)
            body.insert(rng.randint(0, max(0, len(body) - 1)), call)
            out = [replace(f, body=tuple(body)) if f.name == host.name else f for f in out]
        return Program(tuple(out), prog.source_path)
    if kind == "delete_function":
        if len(fns) <= 1:
            return prog
        return Program(tuple(f for f in fns if f.name != fn.name), prog.source_path)
    if kind == "params":
        params = fn.params[:-1] if fn.params and rng.random() < 0.5 else fn.params + (f"p{len(fn.params)}",)
        return _with_fn(prog, replace(fn, params=params))
    raise ValueError(f"unknown mutation {kind!r}")


def _iter_all(s):
    from .lang import iter_exprs

    return iter_exprs(s)


def _ghost_arity(fns) -> int:
    for f in fns:
        for s in f.body:
            for e in _iter_all(s):
                if isinstance(e, Call) and e.name == GHOST:
                    return len(e.args)
    return 0


def mutate_n(prog: Program, rng: random.Random, n: int, kinds=MUTATION_KINDS) -> tuple:
    applied = []
    for _ in range(n):
        kind = rng.choice(kinds)
        prog = mutate(prog, rng, kind)
        applied.append(kind)
    return prog, applied


# --------------------------------------------------------------------------- suites & projects


def random_suite(prog: Program, rng: random.Random, n_tests: int, step_limit: int = 5000,
                 arg_range=(-4, 4), prefix: str = "t") -> list:
    """Tests on random entries whose expected values mostly match the program."""
    fns = list(prog.functions)
    raw = []
    for i in range(n_tests):
        fn = rng.choice(fns)
        args = tuple(rng.randint(*arg_range) for _ in range(fn.arity))
        raw.append(TestCase(f"{prefix}{i}", fn.name, args, ExpectError()))
    results = execute_suite(prog, None, raw, step_limit)
    suite = []
    for r in results:
        o = r.outcome
        if o.error_kind is not None:
            expected = ExpectError()
        elif rng.random() < 0.85:
            expected = ExpectValue(o.value)
        else:
            expected = ExpectValue(o.value + 1)
        suite.append(replace(r.test, expected=expected))
    return suite


def write_project(root, prog: Program, suite, requirements=(), files: int = 1) -> Path:
    """Lay out ``prog`` as a project directory with manifests."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    write_sources(root, prog, files)
    (root / "tests.json").write_text(json.dumps({"tests": [t.to_dict() for t in suite]}, indent=1))
    (root / "requirements.json").write_text(json.dumps(
        {"requirements": [{"id": r.id, "text": r.text} for r in requirements]}, indent=1))
    return root


def write_sources(root, prog: Program, files: int = 1) -> None:
    root = Path(root)
    for old in root.glob("*.ml0"):
        old.unlink()
    chunks: list = [[] for _ in range(files)]
    for i, fn in enumerate(prog.functions):
        chunks[i * files // max(1, len(prog.functions))].append(serialize_function(fn))
    for k, chunk in enumerate(chunks):
        (root / f"mod{k:02d}.ml0").write_text("\n\n".join(chunk) + "\n", encoding="utf-8")
