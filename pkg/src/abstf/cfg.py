"""Per-function control-flow graphs and the whole-program call graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lang import FunctionDef, If, Program, Return, While, calls_in, canonical_label

ENTRY = "Entry"
EXIT = "Exit"
STATEMENT = "Statement"
PREDICATE = "Predicate"


@dataclass(frozen=True)
class CfgNode:
    id: int
    kind: str
    label: str = ""
    # Executable AST node; absent on graphs restored from a dump.
    stmt: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, order=True)
class CfgEdge:
    src: int
    label: str
    dst: int


@dataclass
class Cfg:
    function: str
    nodes: list
    edges: list
    entry_id: int
    exit_id: int
    _succ: dict = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        self._succ = {(e.src, e.label): e.dst for e in self.edges}

    def successor(self, src: int, label: str) -> Optional[int]:
        return self._succ.get((src, label))

    def out_edges(self, src: int) -> list:
        return [e for e in self.edges if e.src == src]

    def edge_keys(self) -> set:
        return set(self._succ)

    def node(self, node_id: int) -> CfgNode:
        return self.nodes[node_id]

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "nodes": [{"id": n.id, "kind": n.kind, "label": n.label} for n in self.nodes],
            "edges": [{"src": e.src, "dst": e.dst, "label": e.label} for e in sorted(self.edges)],
            "entry": self.entry_id,
            "exit": self.exit_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Cfg":
        nodes = [CfgNode(n["id"], n["kind"], n["label"]) for n in sorted(data["nodes"], key=lambda n: n["id"])]
        edges = [CfgEdge(e["src"], e["label"], e["dst"]) for e in data["edges"]]
        return cls(data["function"], nodes, sorted(edges), data["entry"], data["exit"])


class _Builder:
    def __init__(self, fn: FunctionDef):
        self.fn = fn
        self.nodes: list[CfgNode] = [CfgNode(0, ENTRY)]
        self.edges: list[tuple] = []  # (src, label, dst) with dst None meaning Exit

    def new_node(self, kind: str, stmt) -> int:
        nid = len(self.nodes)
        self.nodes.append(CfgNode(nid, kind, canonical_label(stmt), stmt))
        return nid

    def connect(self, pending, dst):
        for src, label in pending:
            self.edges.append((src, label, dst))

    def block(self, stmts, pending):
        """Lay out ``stmts``; ``pending`` are (src, label) exits awaiting the next node.

        Returns the exits left dangling after the block.
        """
        for stmt in stmts:
            if isinstance(stmt, If):
                pid = self.new_node(PREDICATE, stmt)
                self.connect(pending, pid)
                then_out = self.block(stmt.then, [(pid, "T")])
                else_out = self.block(stmt.orelse or (), [(pid, "F")])
                pending = then_out + else_out
            elif isinstance(stmt, While):
                pid = self.new_node(PREDICATE, stmt)
                self.connect(pending, pid)
                body_out = self.block(stmt.body, [(pid, "T")])
                self.connect([(src, label) for src, label in body_out], pid)
                pending = [(pid, "F")]
            else:
                sid = self.new_node(STATEMENT, stmt)
                self.connect(pending, sid)
                if isinstance(stmt, Return):
                    self.edges.append((sid, "E", None))
                    pending = []
                else:
                    pending = [(sid, "E")]
        return pending

    def build(self) -> Cfg:
        tail = self.block(self.fn.body, [(0, "E")])
        exit_id = len(self.nodes)
        self.nodes.append(CfgNode(exit_id, EXIT))
        self.connect(tail, None)
        edges = sorted(CfgEdge(s, l, exit_id if d is None else d) for s, l, d in self.edges)
        return Cfg(self.fn.name, self.nodes, edges, 0, exit_id)


def build_cfg(fn: FunctionDef) -> Cfg:
    """Build the control-flow graph of one function.

    Node ids follow construction pre-order: Entry is 0, statements and
    predicates are numbered in source order, Exit takes the last id.
    Statements after a ``return`` keep their nodes but have no in-edges.
    """
    return _Builder(fn).build()


def build_cfgs(prog: Program) -> dict:
    return {fn.name: build_cfg(fn) for fn in prog.functions}


@dataclass(frozen=True, order=True)
class CallSite:
    caller: str
    callee: str
    ordinal: int
    defined: bool = True


@dataclass
class CallGraph:
    nodes: list
    call_sites: list

    def callers_of(self, callee: str) -> set:
        return {s.caller for s in self.call_sites if s.callee == callee}

    @property
    def undefined_callees(self) -> set:
        return {s.callee for s in self.call_sites if not s.defined}

    def edges(self) -> set:
        return {(s.caller, s.callee) for s in self.call_sites}

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "call_sites": [[s.caller, s.callee, s.ordinal, s.defined] for s in self.call_sites],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CallGraph":
        return cls(list(data["nodes"]), [CallSite(*row) for row in data["call_sites"]])


def build_call_graph(prog: Program) -> CallGraph:
    """One call site per syntactic ``Call``, numbered per caller in source order.

    Calls to names without a definition are kept with ``defined=False``.
    """
    defined = set(prog.names)
    sites = []
    for fn in prog.functions:
        ordinal = 0
        for stmt in fn.body:
            for call in _calls_deep(stmt):
                sites.append(CallSite(fn.name, call.name, ordinal, call.name in defined))
                ordinal += 1
    return CallGraph(list(prog.names), sites)


def _calls_deep(stmt):
    yield from calls_in(stmt)
    if isinstance(stmt, If):
        for s in stmt.then + (stmt.orelse or ()):
            yield from _calls_deep(s)
    elif isinstance(stmt, While):
        for s in stmt.body:
            yield from _calls_deep(s)
