"""Directed graphs and the depth-first machinery the constructions consume."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "DirectedGraph",
    "DepthFirstForest",
    "EdgeKind",
    "ParseError",
    "depth_first_forest",
    "strongly_connected_components",
    "lowest_common_ancestors",
    "parse_graph",
    "format_graph",
    "graph_to_dot",
]


class ParseError(ValueError):
    """Malformed input text, with a 1-based line and column."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class EdgeKind(enum.IntEnum):
    TREE = _kernels.TREE
    BACK = _kernels.BACK
    FORWARD = _kernels.FORWARD
    CROSS = _kernels.CROSS


def _as_edge_array(edges) -> np.ndarray:
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                     dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), np.int64)
    arr = arr.reshape(-1, 2)
    lo = arr.min()
    a = arr - lo
    span = int(a[:, 1].max()) + 1
    keys = np.unique(a[:, 0] * span + a[:, 1])
    return np.stack((keys // span, keys % span), axis=1) + lo


class DirectedGraph:
    """A dependency graph ``G(V, ->)`` over integer vertex ids.

    Vertex ids live in ``range(vertex_count)``. A graph may be restricted to
    a subset of that range (``vertices``), which keeps ids stable for
    induced subgraphs. ``base`` only affects how ids are printed: the label
    of vertex ``v`` is ``v + base``.
    """

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int]] = (),
                 entry: int | None = None, vertices: Iterable[int] | None = None,
                 base: int = 0):
        if vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        self.vertex_count = int(vertex_count)
        self.base = int(base)
        if vertices is None:
            self._subset = None
        else:
            vs = np.unique(np.asarray(list(vertices), dtype=np.int64))
            if vs.size and (vs[0] < 0 or vs[-1] >= vertex_count):
                raise ValueError("vertex outside 0..vertex_count-1")
            self._subset = vs
        e = _as_edge_array(edges)
        if e.size:
            if e.min() < 0 or e.max() >= vertex_count:
                raise ValueError("edge endpoint outside 0..vertex_count-1")
            if self._subset is not None:
                mask = self.vertex_mask
                if not (mask[e[:, 0]].all() and mask[e[:, 1]].all()):
                    raise ValueError("edge endpoint outside the vertex set")
        self.edges = e
        self.edges.setflags(write=False)
        if entry is not None:
            entry = int(entry)
            if not (0 <= entry < vertex_count) or not self.vertex_mask[entry]:
                raise ValueError(f"entry {entry} is not a vertex")
        self.entry = entry

    @cached_property
    def vertices(self) -> np.ndarray:
        if self._subset is None:
            return np.arange(self.vertex_count, dtype=np.int64)
        return self._subset

    @cached_property
    def vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.vertex_count, dtype=np.bool_)
        mask[self.vertices] = True
        return mask

    @cached_property
    def offsets(self) -> np.ndarray:
        counts = np.bincount(self.edges[:, 0], minlength=self.vertex_count)
        off = np.zeros(self.vertex_count + 1, dtype=np.int64)
        np.cumsum(counts, out=off[1:])
        return off

    @property
    def targets(self) -> np.ndarray:
        return self.edges[:, 1]

    @cached_property
    def _pred_csr(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.lexsort((self.edges[:, 0], self.edges[:, 1]))
        counts = np.bincount(self.edges[:, 1], minlength=self.vertex_count)
        off = np.zeros(self.vertex_count + 1, dtype=np.int64)
        np.cumsum(counts, out=off[1:])
        return off, self.edges[order, 0]

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def successors(self, v: int) -> np.ndarray:
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def predecessors(self, v: int) -> np.ndarray:
        off, src = self._pred_csr
        return src[off[v]:off[v + 1]]

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        s = self.successors(u)
        i = np.searchsorted(s, v)
        return bool(i < len(s) and s[i] == v)

    def label(self, v: int) -> str:
        return str(int(v) + self.base)

    def induced(self, vertices: Iterable[int]) -> "DirectedGraph":
        """Subgraph on ``vertices`` with ids unchanged."""
        vs = np.unique(np.asarray(list(vertices), dtype=np.int64))
        mask = np.zeros(self.vertex_count, dtype=np.bool_)
        mask[vs] = True
        keep = mask[self.edges[:, 0]] & mask[self.edges[:, 1]]
        entry = self.entry if self.entry is not None and mask[self.entry] else None
        return DirectedGraph(self.vertex_count, self.edges[keep], entry=entry,
                             vertices=vs, base=self.base)

    def without_edges(self, removed: Iterable[tuple[int, int]]) -> "DirectedGraph":
        drop = set(map(tuple, removed))
        keep = [e for e in self.edges.tolist() if tuple(e) not in drop]
        return DirectedGraph(self.vertex_count, keep, entry=self.entry,
                             vertices=self._subset, base=self.base)

    def is_acyclic(self) -> bool:
        comp, count = _kernels.tarjan_scc(self.vertex_count, self.offsets,
                                          self.targets, self.vertices)
        if count != len(self.vertices):
            return False
        return not np.any(self.edges[:, 0] == self.edges[:, 1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (self.vertex_count == other.vertex_count
                and self.entry == other.entry
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.edges, other.edges))

    __hash__ = None

    def __repr__(self) -> str:
        return (f"DirectedGraph(vertices={len(self)}, edges={self.edge_count}, "
                f"entry={self.entry})")


@dataclass(frozen=True, eq=False)
class DepthFirstForest:
    """DFN/post-DFN numbering, tree parents and edge classes of one DFS.

    Arrays are indexed by vertex id (``-1`` for ids outside the graph);
    ``kind`` is aligned with ``graph.edges``.
    """

    graph: DirectedGraph
    dfn: np.ndarray
    post_dfn: np.ndarray
    parent: np.ndarray
    order: np.ndarray
    kind: np.ndarray

    def classification(self) -> dict[tuple[int, int], EdgeKind]:
        return {(int(u), int(v)): EdgeKind(int(k))
                for (u, v), k in zip(self.graph.edges, self.kind)}

    def edges_of_kind(self, *kinds: EdgeKind) -> np.ndarray:
        mask = np.isin(self.kind, np.asarray([int(k) for k in kinds], np.int8))
        return self.graph.edges[mask]

    @property
    def back_edges(self) -> np.ndarray:
        return self.edges_of_kind(EdgeKind.BACK)

    def post_order(self) -> list[int]:
        by_post = np.empty(len(self.order), np.int64)
        by_post[self.post_dfn[self.order]] = self.order
        return by_post.tolist()

    def is_ancestor(self, a: int, v: int) -> bool:
        """Reflexive ancestor test in the forest."""
        while v != -1:
            if v == a:
                return True
            v = int(self.parent[v])
        return False


def _roots(g: DirectedGraph) -> np.ndarray:
    if g.entry is None:
        return g.vertices
    return np.concatenate(([g.entry], g.vertices)).astype(np.int64)


def depth_first_forest(g: DirectedGraph) -> DepthFirstForest:
    """Deterministic DFS: entry first, then remaining roots and successors ascending."""
    dfn, post, parent, order, kind = _kernels.dfs_forest(
        g.vertex_count, g.offsets, g.targets, _roots(g))
    for a in (dfn, post, parent, order, kind):
        a.setflags(write=False)
    return DepthFirstForest(g, dfn, post, parent, order, kind)


def strongly_connected_components(g: DirectedGraph) -> list[list[int]]:
    """Maximal SCCs in reverse topological order, each sorted ascending."""
    comp, count = _kernels.tarjan_scc(g.vertex_count, g.offsets, g.targets,
                                      g.vertices)
    vs = g.vertices
    cs = comp[vs]
    order = np.lexsort((vs, cs))
    groups = np.split(vs[order], np.flatnonzero(np.diff(cs[order])) + 1)
    return [grp.tolist() for grp in groups if grp.size]


def lowest_common_ancestors(forest: DepthFirstForest,
                            queries: Sequence[tuple[int, int]]) -> list[int]:
    """Offline LCA of every query pair; raises if a pair spans two trees."""
    q = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    if len(q) and (forest.dfn[q] < 0).any():
        raise ValueError("query vertex is not in the forest")
    ans = _kernels.offline_lca(forest.graph.vertex_count, forest.order,
                               forest.post_dfn, forest.parent, q[:, 0].copy(),
                               q[:, 1].copy())
    bad = np.flatnonzero(ans < 0)
    if bad.size:
        u, v = q[bad[0]]
        raise ValueError(f"no common ancestor for ({u}, {v})")
    return ans.tolist()


# -- text format -----------------------------------------------------------

def _int_token(tok: str, line: int, col: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(line, col, f"expected integer {what}, got {tok!r}") from None


def tokenize(text: str):
    """Yield ``(line_no, [(column, token), ...])`` for non-blank lines."""
    for ln, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        toks = []
        col = 0
        for part in body.split():
            col = body.index(part, col)
            toks.append((col + 1, part))
            col += len(part)
        if toks:
            yield ln, toks


def parse_graph(text: str) -> DirectedGraph:
    """Parse ``vertices N`` / ``entry K`` / ``edge U V`` / ``base B`` lines."""
    count = None
    entry = None
    base = 0
    edges = []
    for ln, toks in tokenize(text):
        col, key = toks[0]
        args = toks[1:]
        arity = {"vertices": 1, "entry": 1, "base": 1, "edge": 2}.get(key)
        if arity is None:
            raise ParseError(ln, col, f"unknown directive {key!r}")
        if len(args) != arity:
            c = args[arity][0] if len(args) > arity else col + len(key)
            raise ParseError(ln, c, f"{key} takes {arity} argument(s)")
        vals = [(c, _int_token(t, ln, c, "value")) for c, t in args]
        if key == "vertices":
            count = vals[0]
            if count[1] < 0:
                raise ParseError(ln, count[0], "vertex count must be non-negative")
        elif key == "entry":
            entry = (ln,) + vals[0]
        elif key == "base":
            base = vals[0][1]
        else:
            edges.append((ln, vals))
    return _assemble(count, entry, base, edges)


def _assemble(count, entry, base, edges) -> DirectedGraph:
    ids = []
    for ln, vals in edges:
        pair = []
        for c, lab in vals:
            v = lab - base
            if v < 0 or (count is not None and v >= count[1]):
                raise ParseError(ln, c, f"vertex {lab} out of range")
            pair.append(v)
        ids.append(tuple(pair))
    if count is None:
        n = max((max(p) for p in ids), default=-1) + 1
        if entry is not None:
            n = max(n, entry[2] - base + 1)
    else:
        n = count[1]
    e = None
    if entry is not None:
        ln, c, lab = entry
        e = lab - base
        if not 0 <= e < n:
            raise ParseError(ln, c, f"entry {lab} out of range")
    return DirectedGraph(n, ids, entry=e, base=base)


def format_graph(g: DirectedGraph) -> str:
    lines = []
    if g.base:
        lines.append(f"base {g.base}")
    lines.append(f"vertices {g.vertex_count}")
    if g.entry is not None:
        lines.append(f"entry {g.label(g.entry)}")
    lines.extend(f"edge {g.label(u)} {g.label(v)}" for u, v in g.edges.tolist())
    return "\n".join(lines) + "\n"


def graph_to_dot(g: DirectedGraph, forest: DepthFirstForest | None = None,
                 name: str = "G") -> str:
    """DOT rendering; back edges of ``forest`` are dashed."""
    forest = forest or depth_first_forest(g)
    out = [f"digraph {name} {{", "  node [shape=circle];"]
    for v in g.vertices.tolist():
        attr = ", style=bold" if v == g.entry else ""
        out.append(f'  n{v} [label="{g.label(v)}"{attr}];')
    for (u, v), k in zip(g.edges.tolist(), forest.kind.tolist()):
        style = " [style=dashed]" if k == EdgeKind.BACK else ""
        out.append(f"  n{u} -> n{v}{style};")
    out.append("}")
    return "\n".join(out) + "\n"
