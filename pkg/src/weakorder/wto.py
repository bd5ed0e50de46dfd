"""Weak topological orders: totally ordered WPOs and their Bourdoncle strings."""

from __future__ import annotations

from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import DepthFirstForest, DirectedGraph, depth_first_forest
from .wpo import Wpo, _tarjan_dict, construct_wpo_bu, construct_wpo_td

__all__ = [
    "Wto",
    "construct_wto_td",
    "construct_wto_bu",
    "feedback_edges_of_wto",
    "wto_violations",
]


class Wto:
    """A WPO whose scheduling closure is total, with its linear order."""

    def __init__(self, base: Wpo, order: Sequence[int]):
        self.base = base
        self.order = np.asarray(order, dtype=np.int64)
        self.order.setflags(write=False)

    @property
    def n(self) -> int:
        return self.base.n

    @cached_property
    def position(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.order.tolist())}

    @cached_property
    def heads_of(self) -> dict[int, tuple[int, ...]]:
        """``omega(v)``: heads of the components holding ``v``, outermost first."""
        n = self.n
        heads = set(self.base.stabilization[:, 1].tolist())
        open_: list[int] = []
        out = {}
        for v in self.order.tolist():
            if v >= n:
                open_.pop()
                continue
            if v in heads:
                open_.append(v)
            out[v] = tuple(open_)
        return out

    def tokens(self) -> list[str]:
        n = self.n
        heads = set(self.base.stabilization[:, 1].tolist())
        toks: list[str] = []
        for v in self.order.tolist():
            if v >= n:
                toks[-1] += ")"
            elif v in heads:
                toks.append("(" + self.base.label(v))
            else:
                toks.append(self.base.label(v))
        return toks

    def __str__(self) -> str:
        return " ".join(self.tokens())

    def __repr__(self) -> str:
        return f"Wto({self})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Wto):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.order, other.order)
                and np.array_equal(self.base.stabilization, other.base.stabilization))

    __hash__ = None

    def chain_edges(self) -> set[tuple[int, int]]:
        o = self.order.tolist()
        return set(zip(o, o[1:]))


def _with_chain(w: Wpo, order: np.ndarray) -> Wpo:
    chain = np.stack((order[:-1], order[1:]), axis=1) if len(order) > 1 else \
        np.empty((0, 2), np.int64)
    sched = np.concatenate((w.scheduling, chain))
    return Wpo(w.n, w.vertices, sched, w.stabilization, exits=w.exits,
               back_edges=w.back_edges, nesting=w.nesting, base=w.base)


def construct_wto_bu(g: DirectedGraph, forest: DepthFirstForest | None = None) -> Wto:
    """Linearize the lifted WPO with a stack-driven topological visit."""
    forest = forest or depth_first_forest(g)
    w = construct_wpo_bu(g, forest, lift=True)
    n = g.vertex_count
    seq = w.sched_sequence
    total = 2 * n
    order = np.argsort(seq[:, 0], kind="stable")
    targets = seq[order, 1].copy()
    offsets = np.zeros(total + 1, np.int64)
    np.cumsum(np.bincount(seq[:, 0], minlength=total), out=offsets[1:])
    indeg = np.bincount(seq[:, 1], minlength=total).astype(np.int64)
    present = np.zeros(total, np.bool_)
    present[w.nodes] = True
    lin = _kernels.linearize(total, present, offsets, targets, indeg)
    return Wto(_with_chain(w, lin), lin)


def construct_wto_td(g: DirectedGraph, forest: DepthFirstForest | None = None) -> Wto:
    """Recursive construction: SCCs split at their minimum-DFN vertex.

    Sibling components at each nesting level are ordered by a stack visit of
    their condensation. Inside a component the visit follows the order in
    which a backward search from the head's back-edge sources discovers the
    siblings; at top level it follows ascending head id. This is the same
    sibling order the stack linearization of the lifted WPO produces.
    """
    forest = forest or depth_first_forest(g)
    n = g.vertex_count
    dfn = forest.dfn
    verts = g.vertices.tolist()
    adj = {v: g.successors(v).tolist() for v in verts}
    pred = {v: g.predecessors(v).tolist() for v in verts}
    order: list[int] = []

    def emit(members: list[int]) -> None:
        k = min(members, key=lambda v: dfn[v])
        order.append(k)
        if len(members) == 1 and k not in adj[k]:
            return
        if len(members) > 1:
            level(set(members) - {k}, k)
        order.append(n + k)

    def level(U: set[int], h: int | None) -> None:
        nodes = sorted(U)
        comps = _tarjan_dict(nodes, {u: [v for v in adj[u] if v in U] for u in nodes})
        rep: dict[int, int] = {}
        members: dict[int, list[int]] = {}
        for c in comps:
            r = min(c, key=lambda v: dfn[v])
            members[r] = c
            for u in c:
                rep[u] = r
        csucc: dict[int, set[int]] = {r: set() for r in members}
        cpred: dict[int, set[int]] = {r: set() for r in members}
        for u in nodes:
            for v in adj[u]:
                if v in U and rep[u] != rep[v]:
                    csucc[rep[u]].add(rep[v])
                    cpred[rep[v]].add(rep[u])
        remaining = {r: len(p) for r, p in cpred.items()}
        stack: list[int] = []
        if h is None:
            rank = {r: r for r in members}
            stack = sorted(r for r in members if remaining[r] == 0)
        else:
            # discovery order of a LIFO backward search from the sinks
            sinks = sorted({rep[p] for p in pred[h] if p in U})
            work = list(sinks)
            seen = set(sinks) | {h}
            found: list[int] = []
            while work:
                v = work.pop()
                found.append(v)
                raw = sorted(p for u in members[v] for p in pred[u]
                             if p == h or (p in U and rep[p] != v))
                for p in raw:
                    r = h if p == h else rep[p]
                    if r not in seen:
                        seen.add(r)
                        work.append(r)
            rank = {r: i for i, r in enumerate(found)}
            for r in sorted({rep[v] for v in adj[h] if v in U}, key=rank.__getitem__):
                if remaining[r] == 0:
                    stack.append(r)
        while stack:
            r = stack.pop()
            emit(members[r])
            for s in sorted(csucc[r], key=rank.__getitem__):
                remaining[s] -= 1
                if remaining[s] == 0:
                    stack.append(s)

    level(set(verts), None)
    w = construct_wpo_td(g, forest)
    lin = np.asarray(order, dtype=np.int64)
    return Wto(_with_chain(w, lin), lin)


def feedback_edges_of_wto(w: Wto, g: DirectedGraph) -> set[tuple[int, int]]:
    """Edges ``(u, v)`` with ``v`` not after ``u`` and ``v`` a head around ``u``."""
    pos = w.position
    omega = w.heads_of
    return {(u, v) for u, v in g.edges.tolist()
            if pos[v] <= pos[u] and v in omega[u]}


def wto_violations(w: Wto, g: DirectedGraph) -> list[str]:
    """Problems with ``w`` as a weak topological order of ``g`` (empty if none)."""
    out = []
    pos = w.position
    omega = w.heads_of
    for u, v in g.edges.tolist():
        if not (pos[u] < pos[v] or (pos[v] <= pos[u] and v in omega[u])):
            out.append(f"edge {g.label(u)}->{g.label(v)} breaks the order")
    s = str(w)
    if "((" in s.replace(" ", ""):
        out.append("two consecutive '('")
    depth = 0
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            out.append("unbalanced parentheses")
            break
    if depth > 0:
        out.append("unbalanced parentheses")
    sched = w.base.sched_set()
    for a, b in w.chain_edges():
        if (a, b) not in sched:
            out.append(f"consecutive nodes {a},{b} not linked")
    return out
