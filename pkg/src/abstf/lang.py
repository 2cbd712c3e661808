"""MiniLang front end: lexer, recursive-descent parser, AST and canonical text.

MiniLang is the subject language every analysis in this package runs on::

    #[req(R1)]
    fn fib(n) {
        if n < 2 { return n; }
        return fib(n - 1) + fib(n - 2);
    }

Canonical text is what makes versions comparable: it is independent of
whitespace and comments, and re-parses to a structurally equal tree.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Union

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

KEYWORDS = frozenset({"fn", "let", "if", "else", "while", "return"})

# Binding power per binary operator; all levels are left-associative.
PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "<": 3, "<=": 3, ">": 3, ">=": 3, "==": 3, "!=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}
UNARY_OPS = ("-", "!")
_UNARY_POWER = 6


class ParseError(Exception):
    """Malformed MiniLang source."""

    def __init__(self, message: str, line: int, col: int, path: str = "<string>"):
        super().__init__(f"{path}:{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.path = path


class DuplicateFunction(ParseError):
    """A function name is defined more than once in a program."""


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class IntLit:
    value: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[IntLit, Var, Call, Binary, Unary]


@dataclass(frozen=True)
class Let:
    name: str
    value: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: Optional[tuple] = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Return:
    value: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Stmt = Union[Let, Assign, If, While, Return, ExprStmt]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple
    body: tuple
    reqs: frozenset = frozenset()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)
    source_path: str = field(default="", compare=False)

    @property
    def body_hash(self) -> str:
        """SHA-256 of the canonical body text."""
        text = "\n".join(serialize_stmt(s) for s in self.body)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Program:
    functions: tuple
    source_path: str = field(default="", compare=False)

    def __post_init__(self):
        seen = set()
        for fn in self.functions:
            if fn.name in seen:
                raise DuplicateFunction(
                    f"duplicate function '{fn.name}'", fn.line, fn.col, fn.source_path or self.source_path
                )
            seen.add(fn.name)

    @property
    def by_name(self) -> dict:
        return {fn.name: fn for fn in self.functions}

    def get(self, name: str) -> Optional[FunctionDef]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None

    @property
    def names(self) -> list:
        return [fn.name for fn in self.functions]


# --------------------------------------------------------------------------- lexer


@dataclass(frozen=True)
class Token:
    kind: str  # INT, IDENT, KW, OP, ANNOT, EOF
    text: str
    line: int
    col: int
    reqs: tuple = ()


_REQID = r"[A-Za-z][A-Za-z0-9_-]*"
_ANNOT_RE = re.compile(rf"#\[req\(\s*({_REQID}(?:\s*,\s*{_REQID})*)\s*\)\]")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")
_OPERATORS = ("&&", "||", "<=", ">=", "==", "!=", "+", "-", "*", "/", "%", "<", ">", "!", "=",
              "(", ")", "{", "}", ",", ";")


def tokenize(source: str, path: str = "<string>") -> Iterator[Token]:
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        col = pos - line_start + 1
        if ch == "\n":
            pos += 1
            line += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue
        if source.startswith("//", pos):
            end = source.find("\n", pos)
            pos = n if end < 0 else end
            continue
        if ch == "#":
            m = _ANNOT_RE.match(source, pos)
            if not m:
                raise ParseError("malformed annotation, expected '#[req(ID, ...)]'", line, col, path)
            ids = tuple(part.strip() for part in m.group(1).split(","))
            yield Token("ANNOT", m.group(0), line, col, ids)
            pos = m.end()
            continue
        m = _INT_RE.match(source, pos)
        if m:
            if _IDENT_RE.match(source, m.end()):
                raise ParseError(f"invalid numeric literal '{m.group(0)}...'", line, col, path)
            yield Token("INT", m.group(0), line, col)
            pos = m.end()
            continue
        m = _IDENT_RE.match(source, pos)
        if m:
            word = m.group(0)
            yield Token("KW" if word in KEYWORDS else "IDENT", word, line, col)
            pos = m.end()
            continue
        for op in _OPERATORS:
            if source.startswith(op, pos):
                yield Token("OP", op, line, col)
                pos += len(op)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col, path)
    yield Token("EOF", "", line, pos - line_start + 1)


# --------------------------------------------------------------------------- parser


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "EOF" else f"'{tok.text}'"


class _Parser:
    def __init__(self, source: str, path: str):
        self.path = path
        self.toks = list(tokenize(source, path))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(f"expected {expected}, found {_describe(tok)}", tok.line, tok.col, self.path)

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            self.error(what or (f"'{text}'" if text else kind.lower()))
        return t

    def program(self) -> Program:
        fns = []
        while not self.at("EOF"):
            fns.append(self.function())
        return Program(tuple(fns), self.path)

    def function(self) -> FunctionDef:
        reqs = set()
        while self.at("ANNOT"):
            reqs.update(self.accept("ANNOT").reqs)
        kw = self.expect("KW", "fn", "'fn'")
        name = self.expect("IDENT", what="function name").text
        self.expect("OP", "(")
        params = []
        if not self.accept("OP", ")"):
            while True:
                p = self.expect("IDENT", what="parameter or ')'" if not params else "parameter")
                if p.text in params:
                    raise ParseError(f"duplicate parameter '{p.text}'", p.line, p.col, self.path)
                params.append(p.text)
                if self.accept("OP", ")"):
                    break
                self.expect("OP", ",", "',' or ')'")
        body = self.block()
        return FunctionDef(name, tuple(params), body, frozenset(reqs), kw.line, kw.col, self.path)

    def block(self) -> tuple:
        self.expect("OP", "{")
        stmts = []
        while not self.accept("OP", "}"):
            if self.at("EOF"):
                self.error("statement or '}'")
            stmts.append(self.statement())
        return tuple(stmts)

    def statement(self) -> Stmt:
        t = self.tok
        if self.accept("KW", "let"):
            name = self.expect("IDENT", what="variable name").text
            self.expect("OP", "=")
            value = self.expr()
            self.expect("OP", ";")
            return Let(name, value, t.line, t.col)
        if self.accept("KW", "if"):
            cond = self.expr()
            then = self.block()
            orelse = self.block() if self.accept("KW", "else") else None
            return If(cond, then, orelse, t.line, t.col)
        if self.accept("KW", "while"):
            cond = self.expr()
            return While(cond, self.block(), t.line, t.col)
        if self.accept("KW", "return"):
            value = self.expr()
            self.expect("OP", ";")
            return Return(value, t.line, t.col)
        if t.kind == "IDENT" and self.peek().kind == "OP" and self.peek().text == "=":
            self.i += 2
            value = self.expr()
            self.expect("OP", ";")
            return Assign(t.text, value, t.line, t.col)
        if t.kind in ("KW", "ANNOT") or (t.kind == "OP" and t.text in "{};)"):
            self.error("statement")
        e = self.expr()
        self.expect("OP", ";")
        return ExprStmt(e, t.line, t.col)

    def expr(self, min_power: int = 1) -> Expr:
        lhs = self.unary()
        while self.tok.kind == "OP" and PRECEDENCE.get(self.tok.text, 0) >= min_power:
            op_tok = self.tok
            power = PRECEDENCE[op_tok.text]
            self.i += 1
            rhs = self.expr(power + 1)
            lhs = Binary(op_tok.text, lhs, rhs, op_tok.line, op_tok.col)
        return lhs

    def unary(self) -> Expr:
        t = self.tok
        if t.kind == "OP" and t.text in UNARY_OPS:
            self.i += 1
            return Unary(t.text, self.unary(), t.line, t.col)
        return self.atom()

    def atom(self) -> Expr:
        t = self.tok
        if self.accept("INT"):
            value = int(t.text)
            if value > INT_MAX:
                raise ParseError(f"integer literal {t.text} exceeds 64-bit range", t.line, t.col, self.path)
            return IntLit(value, t.line, t.col)
        if self.accept("IDENT"):
            if self.accept("OP", "("):
                args = []
                if not self.accept("OP", ")"):
                    while True:
                        args.append(self.expr())
                        if self.accept("OP", ")"):
                            break
                        self.expect("OP", ",", "',' or ')'")
                return Call(t.text, tuple(args), t.line, t.col)
            return Var(t.text, t.line, t.col)
        if self.accept("OP", "("):
            e = self.expr()
            self.expect("OP", ")")
            return e
        self.error("expression")


def parse_program(source: str, path: str = "<string>") -> Program:
    """Parse MiniLang source into a :class:`Program`.

    Raises:
        ParseError: on malformed input, with line and column.
        DuplicateFunction: when a function name repeats.
    """
    return _Parser(source, path).program()


def parse_expr(source: str) -> Expr:
    p = _Parser(source, "<expr>")
    e = p.expr()
    p.expect("EOF", what="end of expression")
    return e


def parse_project(root, exclude=()) -> Program:
    """Parse every ``*.ml0`` file under ``root`` into a single Program.

    Files are read in sorted path order so function order is deterministic.
    """
    root = Path(root)
    excluded = [Path(root, e).resolve() for e in exclude]
    fns = []
    for path in sorted(root.rglob("*.ml0")):
        resolved = path.resolve()
        if any(resolved.is_relative_to(e) for e in excluded):
            continue
        rel = path.relative_to(root).as_posix()
        fns.extend(parse_program(path.read_text(encoding="utf-8"), rel).functions)
    return Program(tuple(fns), str(root))


# --------------------------------------------------------------------------- canonical text


def serialize_expr(e: Expr, parent_power: int = 0, right: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}(" + ", ".join(serialize_expr(a) for a in e.args) + ")"
    if isinstance(e, Unary):
        inner = serialize_expr(e.operand, _UNARY_POWER)
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        power = PRECEDENCE[e.op]
        text = f"{serialize_expr(e.lhs, power)} {e.op} {serialize_expr(e.rhs, power, right=True)}"
        if power < parent_power or (right and power == parent_power):
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {e!r}")


def canonical_label(node) -> str:
    """Single-line canonical rendering of a statement or predicate.

    ``If``/``While`` render only their predicate (``"if x < 2"``). A bare
    expression renders as itself.
    """
    if isinstance(node, Let):
        return f"let {node.name} = {serialize_expr(node.value)};"
    if isinstance(node, Assign):
        return f"{node.name} = {serialize_expr(node.value)};"
    if isinstance(node, Return):
        return f"return {serialize_expr(node.value)};"
    if isinstance(node, ExprStmt):
        return f"{serialize_expr(node.expr)};"
    if isinstance(node, If):
        return f"if {serialize_expr(node.cond)}"
    if isinstance(node, While):
        return f"while {serialize_expr(node.cond)}"
    return serialize_expr(node)


def serialize_stmt(stmt: Stmt, indent: int = 0) -> str:
    pad = "    " * indent
    if isinstance(stmt, If):
        text = f"{pad}{canonical_label(stmt)} {serialize_block(stmt.then, indent)}"
        if stmt.orelse is not None:
            text += f" else {serialize_block(stmt.orelse, indent)}"
        return text
    if isinstance(stmt, While):
        return f"{pad}{canonical_label(stmt)} {serialize_block(stmt.body, indent)}"
    return pad + canonical_label(stmt)


def serialize_block(stmts, indent: int = 0) -> str:
    if not stmts:
        return "{ }"
    inner = "\n".join(serialize_stmt(s, indent + 1) for s in stmts)
    return "{\n" + inner + "\n" + "    " * indent + "}"


def serialize_function(fn: FunctionDef) -> str:
    head = ""
    if fn.reqs:
        head = "#[req(" + ",".join(sorted(fn.reqs)) + ")]\n"
    return f"{head}fn {fn.name}(" + ", ".join(fn.params) + ") " + serialize_block(fn.body)


def serialize_program(prog: Program) -> str:
    return "\n\n".join(serialize_function(fn) for fn in prog.functions) + "\n"


# --------------------------------------------------------------------------- traversal helpers


def iter_exprs(node) -> Iterator[Expr]:
    """Yield every expression under a statement/expression, pre-order, source order."""
    if isinstance(node, (IntLit, Var)):
        yield node
    elif isinstance(node, Call):
        yield node
        for a in node.args:
            yield from iter_exprs(a)
    elif isinstance(node, Binary):
        yield node
        yield from iter_exprs(node.lhs)
        yield from iter_exprs(node.rhs)
    elif isinstance(node, Unary):
        yield node
        yield from iter_exprs(node.operand)
    elif isinstance(node, (Let, Assign, Return)):
        yield from iter_exprs(node.value)
    elif isinstance(node, ExprStmt):
        yield from iter_exprs(node.expr)
    elif isinstance(node, If):
        yield from iter_exprs(node.cond)
        for s in node.then:
            yield from iter_exprs(s)
        for s in node.orelse or ():
            yield from iter_exprs(s)
    elif isinstance(node, While):
        yield from iter_exprs(node.cond)
        for s in node.body:
            yield from iter_exprs(s)


def calls_in(node) -> list:
    """Call expressions syntactically inside ``node`` (not descending into nested blocks
    for If/While, whose predicate alone belongs to the node)."""
    if isinstance(node, If) or isinstance(node, While):
        node = node.cond
    return [e for e in iter_exprs(node) if isinstance(e, Call)]
