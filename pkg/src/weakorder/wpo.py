"""Weak partial orders: the data type, the axiom checker and two constructors.

Node ids: vertex ``v`` of a graph with ``vertex_count == n`` is node ``v``;
the exit of head ``h`` is node ``n + h``. Both constructors use this scheme,
so their outputs compare by plain equality.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from . import _kernels
from .graph import DepthFirstForest, DirectedGraph, EdgeKind, depth_first_forest

__all__ = [
    "Wpo",
    "Violation",
    "construct_wpo_td",
    "construct_wpo_bu",
    "validate_axioms",
    "back_edge_set",
    "restrict",
    "parse_wpo_dump",
    "wpo_to_dot",
]


def _pairs(pairs) -> np.ndarray:
    if isinstance(pairs, np.ndarray):
        arr = pairs.astype(np.int64, copy=False).reshape(-1, 2)
    else:
        arr = np.asarray(sorted(set(map(tuple, pairs))), dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.empty((0, 2), np.int64)
    # sort on a packed 64-bit key; row-wise unique is much slower
    lo = arr.min()
    a = arr - lo
    span = int(a[:, 1].max()) + 1
    keys = np.unique(a[:, 0] * span + a[:, 1])
    arr = np.stack((keys // span, keys % span), axis=1) + lo
    arr.setflags(write=False)
    return arr


class Wpo:
    """The tuple ``(V, X, ->sched, ~>stab)`` plus component data.

    ``nesting`` (optional) is an array over vertex ids: for a head it names
    the head of the enclosing component, for any other vertex the head of
    the innermost component holding it; ``-1`` means top level. When it is
    not supplied it is derived from the relations.
    """

    def __init__(self, n: int, vertices: Iterable[int],
                 scheduling, stabilization, exits: Iterable[int] | None = None,
                 back_edges=None, nesting: np.ndarray | None = None,
                 base: int = 0, sched_sequence: np.ndarray | None = None):
        self.n = int(n)
        self.vertices = np.unique(np.asarray(list(vertices), dtype=np.int64))
        self.scheduling = _pairs(scheduling)
        self.stabilization = _pairs(stabilization)
        if exits is None:
            exits = self.stabilization[:, 0]
        self.exits = np.unique(np.asarray(list(exits), dtype=np.int64))
        self.back_edges = None if back_edges is None else _pairs(back_edges)
        self.base = int(base)
        self._nesting = nesting
        # insertion-ordered scheduling edges, kept for linearization
        self.sched_sequence = sched_sequence

    # -- node naming --------------------------------------------------------
    def is_exit(self, node: int) -> bool:
        return node >= self.n

    def exit_of(self, head: int) -> int:
        return self.n + head

    def head_of(self, exit_node: int) -> int:
        return exit_node - self.n

    def label(self, node: int) -> str:
        node = int(node)
        if node >= self.n:
            return f"x{node - self.n + self.base}"
        return str(node + self.base)

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.concatenate((self.vertices, self.exits))

    @cached_property
    def heads(self) -> np.ndarray:
        return np.sort(self.stabilization[:, 1])

    # -- relation views ------------------------------------------------------
    def sched_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.scheduling.tolist()))

    def stab_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.stabilization.tolist()))

    @cached_property
    def _succ(self) -> dict[int, list[int]]:
        d = defaultdict(list)
        for u, v in self.scheduling.tolist():
            d[u].append(v)
        return d

    @cached_property
    def _pred(self) -> dict[int, list[int]]:
        d = defaultdict(list)
        for u, v in self.scheduling.tolist():
            d[v].append(u)
        return d

    def successors(self, node: int) -> list[int]:
        return self._succ.get(node, [])

    def predecessors(self, node: int) -> list[int]:
        return self._pred.get(node, [])

    def num_sched_preds(self, node: int) -> int:
        return len(self._pred.get(node, ()))

    # -- components ----------------------------------------------------------
    @cached_property
    def nesting(self) -> np.ndarray:
        if self._nesting is not None:
            return self._nesting
        return _derive_nesting(self)

    def innermost_head(self, node: int) -> int:
        """Head of the smallest component containing ``node``, or -1."""
        node = int(node)
        if node >= self.n:
            return node - self.n
        if self._stab_heads_mask[node]:
            return node
        return int(self.nesting[node])

    @cached_property
    def _stab_heads_mask(self) -> np.ndarray:
        m = np.zeros(self.n, np.bool_)
        m[self.stabilization[:, 1]] = True
        return m

    def enclosing_heads(self, node: int) -> list[int]:
        """Heads of all components containing ``node``, outermost first."""
        chain = []
        h = self.innermost_head(node)
        while h != -1:
            chain.append(h)
            h = int(self.nesting[h])
        chain.reverse()
        return chain

    def in_component(self, node: int, head: int) -> bool:
        h = self.innermost_head(node)
        while h != -1:
            if h == head:
                return True
            h = int(self.nesting[h])
        return False

    @cached_property
    def components(self) -> dict[int, frozenset[int]]:
        """Map head -> component node set ``C_h``."""
        members: dict[int, list[int]] = {int(h): [] for h in self.heads}
        for node in self.nodes.tolist():
            h = self.innermost_head(node)
            while h != -1:
                members[h].append(node)
                h = int(self.nesting[h])
        return {h: frozenset(m) for h, m in members.items()}

    def num_outer_sched_preds(self, node: int, exit_node: int) -> int:
        """Scheduling predecessors of ``node`` lying outside ``C_x``."""
        h = self.head_of(exit_node)
        return sum(1 for u in self.predecessors(node) if not self.in_component(u, h))

    @cached_property
    def outer_sched_preds(self) -> dict[tuple[int, int], int]:
        """``(node, exit) -> NumOuterSchedPreds`` for every node of every component."""
        out = {}
        for h, comp in self.components.items():
            x = self.exit_of(h)
            for v in comp:
                out[(v, x)] = sum(1 for u in self.predecessors(v) if u not in comp)
        return out

    # -- equality / output ---------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Wpo):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.exits, other.exits)
                and np.array_equal(self.scheduling, other.scheduling)
                and np.array_equal(self.stabilization, other.stabilization))

    __hash__ = None

    def __repr__(self) -> str:
        return (f"Wpo(vertices={len(self.vertices)}, exits={len(self.exits)}, "
                f"sched={len(self.scheduling)}, stab={len(self.stabilization)})")

    def dump(self) -> str:
        """Stable text form: ``node``, ``sched U V`` and ``stab X H`` lines."""
        lab = self.label
        lines = [f"node {lab(v)}" for v in self.nodes.tolist()]
        lines += [f"sched {lab(u)} {lab(v)}" for u, v in self.scheduling.tolist()]
        lines += [f"stab {lab(x)} {lab(h)}" for x, h in self.stabilization.tolist()]
        return "\n".join(lines) + "\n"

    def with_relations(self, scheduling=None, stabilization=None) -> "Wpo":
        """Copy with replaced relations (component data re-derived)."""
        return Wpo(self.n, self.vertices,
                   self.scheduling if scheduling is None else scheduling,
                   self.stabilization if stabilization is None else stabilization,
                   exits=self.exits, back_edges=self.back_edges, base=self.base)


def _derive_nesting(w: Wpo) -> np.ndarray:
    """Component forest computed from the relations alone."""
    comps = {}
    for x, h in w.stabilization.tolist():
        fwd = _reach(h, w.successors)
        bwd = _reach(x, w.predecessors)
        comps[h] = fwd & bwd
    nesting = np.full(w.n, -1, np.int64)
    # larger components first, so smaller ones overwrite
    for h in sorted(comps, key=lambda k: -len(comps[k])):
        for node in comps[h]:
            if node < w.n and node != h:
                nesting[node] = h
    return nesting


def _reach(start: int, step) -> set[int]:
    seen = {start}
    todo = [start]
    while todo:
        u = todo.pop()
        for v in step(u):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


# ---------------------------------------------------------------------------
# top-down construction (reference)

def construct_wpo_td(g: DirectedGraph, forest: DepthFirstForest | None = None) -> Wpo:
    """Recursive construction: break each SCC at its minimum-DFN vertex."""
    forest = forest or depth_first_forest(g)
    n = g.vertex_count
    dfn = forest.dfn
    sched: set[tuple[int, int]] = set()
    stab: set[tuple[int, int]] = set()
    nesting = np.full(n, -1, np.int64)

    def build(nodes: list[int], adj: dict[int, list[int]], outer: int) -> None:
        comps = _tarjan_dict(nodes, adj)
        which = {}
        exit_of = {}
        for i, comp in enumerate(comps):
            x = scc_wpo(comp, adj, outer)
            for u in comp:
                which[u] = i
                exit_of[u] = x
        # dependencies between maximal SCCs leave through the source's exit
        for u in nodes:
            for v in adj[u]:
                if which[u] != which[v]:
                    sched.add((exit_of[u], v))

    def scc_wpo(comp: list[int], adj, outer: int) -> int:
        if len(comp) == 1 and comp[0] >= n:
            return comp[0]
        h = min(comp, key=lambda v: dfn[v])
        nesting[h] = outer
        for v in comp:
            if v != h and v < n:
                nesting[v] = outer
        back = [v for v in comp if h in adj[v]]
        if not back:
            return h
        x = n + h
        stab.add((x, h))
        if len(comp) == 1:
            sched.add((h, x))
            return x
        rest = [v for v in comp if v != h]
        inside = set(rest)
        adj2 = {}
        for u in rest:
            nxt = [v for v in adj[u] if v in inside]
            if h in adj[u]:
                nxt.append(x)
            adj2[u] = nxt
        adj2[x] = []
        build(rest + [x], adj2, h)
        for v in adj[h]:
            if v in inside:
                sched.add((h, v))
        if h in adj[h]:
            sched.add((h, x))
        return x

    verts = g.vertices.tolist()
    adj = {v: g.successors(v).tolist() for v in verts}
    build(verts, adj, -1)
    exits = sorted(x for x, _ in stab)
    return Wpo(n, verts, sched, stab, exits=exits, back_edges=forest.back_edges,
               nesting=nesting, base=g.base)


def _tarjan_dict(nodes: list[int], adj: dict[int, list[int]]) -> list[list[int]]:
    """Iterative Tarjan over a dict adjacency (reference path)."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    stack: list[int] = []
    on_stack: set[int] = set()
    out: list[list[int]] = []
    counter = 0
    for s in nodes:
        if s in index:
            continue
        index[s] = low[s] = counter
        counter += 1
        stack.append(s)
        on_stack.add(s)
        calls = [(s, iter(adj[s]))]
        while calls:
            v, it = calls[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    calls.append((w, iter(adj[w])))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                calls.pop()
                if calls:
                    u = calls[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    out.append(sorted(comp))
    return out


# ---------------------------------------------------------------------------
# bottom-up construction

def _bu_arrays(g: DirectedGraph, forest: DepthFirstForest, lift: bool):
    n = g.vertex_count
    kind = forest.kind
    edges = g.edges
    back = edges[kind == EdgeKind.BACK]
    cf = edges[(kind == EdgeKind.CROSS) | (kind == EdgeKind.FORWARD)]
    order = np.lexsort((back[:, 0], back[:, 1]))
    bp_src = back[order, 0].copy()
    bp_off = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(back[:, 1], minlength=n), out=bp_off[1:])
    cf_u = cf[:, 0].copy()
    cf_v = cf[:, 1].copy()
    lca = _kernels.offline_lca(n, forest.order, forest.post_dfn, forest.parent,
                               cf_u, cf_v)
    return _kernels.build_wpo(n, forest.order, forest.parent, bp_off, bp_src,
                              cf_u, cf_v, lca, bool(lift))


def _dedup_in_order(src: np.ndarray, dst: np.ndarray, n: int) -> np.ndarray:
    key = src * (2 * n) + dst
    _, first = np.unique(key, return_index=True)
    first.sort()
    return np.stack((src[first], dst[first]), axis=1)


def construct_wpo_bu(g: DirectedGraph, forest: DepthFirstForest | None = None,
                     lift: bool = False) -> Wpo:
    """Almost-linear bottom-up construction.

    With ``lift`` every non-back edge entering a component also schedules the
    component head after the source's exit.
    """
    forest = forest or depth_first_forest(g)
    n = g.vertex_count
    s_src, s_dst, st_x, st_h, cparent = _bu_arrays(g, forest, lift)
    seq = _dedup_in_order(s_src, s_dst, n)
    stab = np.stack((st_x, st_h), axis=1)
    return Wpo(n, g.vertices, seq, stab, exits=st_x, back_edges=forest.back_edges,
               nesting=cparent, base=g.base, sched_sequence=seq)


# ---------------------------------------------------------------------------
# axioms

@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    message: str

    def __str__(self) -> str:
        return f"{self.axiom}: {self.message}"


def _closure(w: Wpo) -> tuple[list[int], dict[int, int], np.ndarray]:
    """Reflexive-transitive closure of scheduling as a boolean matrix."""
    nodes = sorted(set(w.nodes.tolist())
                   | set(w.scheduling.ravel().tolist())
                   | set(w.stabilization.ravel().tolist()))
    idx = {v: i for i, v in enumerate(nodes)}
    k = len(nodes)
    r = np.eye(k, dtype=np.bool_)
    for u, v in w.scheduling.tolist():
        r[idx[u], idx[v]] = True
    for m in range(k):
        r |= np.outer(r[:, m], r[m, :])
    return nodes, idx, r


def validate_axioms(w: Wpo, g: DirectedGraph) -> list[Violation]:
    """Check W1-W5 (with H1-H5) by brute force; returns the violations found."""
    out: list[Violation] = []
    lab = w.label
    V = set(w.vertices.tolist())
    X = set(w.exits.tolist())
    nodes_all = V | X
    gv = set(g.vertices.tolist())

    if V != gv:
        out.append(Violation("W", (), "vertex set differs from the graph's"))
    for v in sorted(V & X):
        out.append(Violation("W1", (v,), f"{lab(v)} is both vertex and exit"))
    stab = w.stab_set()
    for x, h in sorted(stab):
        if x not in X or h not in V:
            out.append(Violation("W2", (x, h), f"stab {lab(x)} {lab(h)} not in X x V"))
    targets = {x for x, _ in stab}
    for x in sorted(X - targets):
        out.append(Violation("W2", (x,), f"exit {lab(x)} has no stabilization edge"))
    for u, v in w.scheduling.tolist():
        if u not in nodes_all or v not in nodes_all:
            out.append(Violation("W3", (u, v), f"sched {lab(u)} {lab(v)} leaves V u X"))

    nodes, idx, r = _closure(w)
    le = lambda a, b: bool(r[idx[a], idx[b]])
    lt = lambda a, b: a != b and le(a, b)

    # H1 antisymmetry
    both = r & r.T
    np.fill_diagonal(both, False)
    for i, j in zip(*np.nonzero(np.triu(both))):
        out.append(Violation("H1", (nodes[i], nodes[j]),
                             f"{lab(nodes[i])} and {lab(nodes[j])} are mutually scheduled"))
    # H2 one-to-one
    seen_x: dict[int, int] = {}
    seen_h: dict[int, int] = {}
    for x, h in sorted(stab):
        if x in seen_x:
            out.append(Violation("H2", (x,), f"{lab(x)} stabilizes two heads"))
        if h in seen_h:
            out.append(Violation("H2", (h,), f"{lab(h)} has two exits"))
        seen_x[x] = h
        seen_h[h] = x
    # H3
    valid_pairs = []
    for x, h in sorted(stab):
        if x in idx and h in idx and lt(h, x):
            valid_pairs.append((x, h))
        else:
            out.append(Violation("H3", (x, h), f"{lab(h)} does not precede {lab(x)}"))
    comps = {}
    for x, h in valid_pairs:
        comps[(x, h)] = frozenset(nodes[i] for i in
                                  np.flatnonzero(r[idx[h], :] & r[:, idx[x]]))
    # H4 laminar family
    keys = list(comps)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            ca, cb = comps[keys[a]], comps[keys[b]]
            if ca == cb or (ca & cb and not (ca <= cb or cb <= ca)):
                out.append(Violation("H4", (keys[a][1], keys[b][1]),
                                     f"components of {lab(keys[a][1])} and "
                                     f"{lab(keys[b][1])} are not nested"))
    # H5 exits do not leak
    for (x, h), comp in comps.items():
        for u in sorted(comp):
            for j in np.flatnonzero(r[idx[u], :]):
                v = nodes[j]
                if not (lt(x, v) or le(v, x)):
                    out.append(Violation("H5", (u, v, x),
                                         f"{lab(u)} in C_{lab(x)} reaches {lab(v)} "
                                         f"around exit {lab(x)}"))
    # W5
    head_comp = {h: c for (x, h), c in comps.items()}
    for u, v in g.edges.tolist():
        if u not in idx or v not in idx:
            out.append(Violation("W5", (u, v), f"edge {lab(u)}->{lab(v)} not covered"))
            continue
        if lt(u, v):
            continue
        if v in head_comp and u in head_comp[v]:
            continue
        out.append(Violation("W5", (u, v),
                             f"edge {lab(u)}->{lab(v)} is neither scheduled nor a "
                             f"back edge into a component headed by {lab(v)}"))
    return out


def back_edge_set(w: Wpo, g: DirectedGraph) -> set[tuple[int, int]]:
    """Graph edges ``(u, v)`` with ``u`` inside the component headed by ``v``."""
    heads = set(w.stabilization[:, 1].tolist())
    return {(u, v) for u, v in g.edges.tolist()
            if v in heads and w.in_component(u, v)}


def restrict(w: Wpo, nodes: Iterable[int]) -> Wpo:
    """Restriction to a component, or to a component minus head and exit."""
    s = frozenset(int(v) for v in nodes)
    comps = w.components
    ok = False
    for h, c in comps.items():
        if s == c or s == c - {h, w.exit_of(h)}:
            ok = True
            break
    if not ok:
        raise ValueError("restriction must be a component or a component "
                         "without its head and exit")
    sched = [(u, v) for u, v in w.scheduling.tolist() if u in s and v in s]
    stab = [(x, h) for x, h in w.stabilization.tolist() if x in s and h in s]
    back = None
    if w.back_edges is not None:
        back = [(u, v) for u, v in w.back_edges.tolist() if u in s and v in s]
    nest = w.nesting.copy()
    for v in range(w.n):
        if nest[v] != -1 and nest[v] not in s:
            nest[v] = -1
    return Wpo(w.n, [v for v in s if v < w.n], sched, stab,
               exits=[x for x in s if x >= w.n], back_edges=back, nesting=nest,
               base=w.base)


# ---------------------------------------------------------------------------
# text / DOT

def parse_wpo_dump(text: str, n: int, base: int = 0) -> Wpo:
    """Inverse of :meth:`Wpo.dump` for a graph with ``n`` vertices."""
    from .graph import ParseError, tokenize

    def node(tok: str, ln: int, col: int) -> int:
        try:
            if tok.startswith("x"):
                return n + int(tok[1:]) - base
            return int(tok) - base
        except ValueError:
            raise ParseError(ln, col, f"bad node {tok!r}") from None

    vs, xs, sched, stab = [], [], [], []
    for ln, toks in tokenize(text):
        col, key = toks[0]
        args = [node(t, ln, c) for c, t in toks[1:]]
        want = {"node": 1, "sched": 2, "stab": 2}.get(key)
        if want is None:
            raise ParseError(ln, col, f"unknown directive {key!r}")
        if len(args) != want:
            raise ParseError(ln, col, f"{key} takes {want} argument(s)")
        if key == "node":
            (xs if args[0] >= n else vs).append(args[0])
        elif key == "sched":
            sched.append(tuple(args))
        else:
            stab.append(tuple(args))
    return Wpo(n, vs, sched, stab, exits=xs, base=base)


def wpo_to_dot(w: Wpo, name: str = "W") -> str:
    out = [f"digraph {name} {{"]
    for v in w.nodes.tolist():
        shape = "doublecircle" if w.is_exit(v) else "circle"
        out.append(f'  n{v} [label="{w.label(v)}", shape={shape}];')
    for u, v in w.scheduling.tolist():
        out.append(f"  n{u} -> n{v};")
    for x, h in w.stabilization.tolist():
        out.append(f"  n{x} -> n{h} [style=dashed, constraint=false, "
                   "headport=n, tailport=s];")
    out.append("}")
    return "\n".join(out) + "\n"
