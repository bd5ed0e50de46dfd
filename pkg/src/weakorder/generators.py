"""Seeded graph and equation-system generators for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .domain import AssignAdd, AssignConst, Copy, EquationSystem, Skip
from .graph import DirectedGraph

__all__ = [
    "random_digraph",
    "random_system",
    "chain",
    "ladder",
    "nested_loops",
    "irreducible",
    "wide_diamond",
    "FAMILIES",
]


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_digraph(n: int, p: float, seed=None, entry: int | None = 0) -> DirectedGraph:
    """Erdos-Renyi style digraph (self-loops allowed) on ``n`` vertices."""
    rng = _rng(seed)
    mask = rng.random((n, n)) < p
    u, v = np.nonzero(mask)
    return DirectedGraph(n, np.stack((u, v), axis=1), entry if n else None)


def _statement(rng: np.random.Generator, variables: tuple[str, ...]):
    kind = rng.integers(4)
    var = variables[rng.integers(len(variables))]
    src = variables[rng.integers(len(variables))]
    if kind == 0:
        return Skip()
    if kind == 1:
        return AssignConst(var, int(rng.integers(-2, 3)))
    if kind == 2:
        return AssignAdd(var, src, int(rng.integers(-2, 3)))
    return Copy(var, src)


def random_system(seed=None, max_vertices: int = 40, max_vars: int = 4,
                  p: float | None = None) -> EquationSystem:
    """Random interval program on a random graph with entry 0."""
    rng = _rng(seed)
    n = int(rng.integers(1, max_vertices + 1))
    k = int(rng.integers(1, max_vars + 1))
    variables = tuple("xyzw"[i] if i < 4 else f"v{i}" for i in range(k))
    if p is None:
        p = min(1.0, float(rng.uniform(1.0, 3.0)) / max(n, 1))
    g = random_digraph(n, p, rng)
    transfer = {v: _statement(rng, variables) for v in range(n)}
    return EquationSystem(g, variables, transfer, 0)


def chain(n: int) -> DirectedGraph:
    idx = np.arange(n - 1, dtype=np.int64)
    return DirectedGraph(n, np.stack((idx, idx + 1), axis=1), 0)


def ladder(n: int) -> DirectedGraph:
    """Two rails joined by rungs; every rung is a two-vertex loop."""
    rungs = max(n // 2, 1)
    a = np.arange(rungs, dtype=np.int64) * 2
    b = a + 1
    edges = [np.stack((a, b), 1), np.stack((b, a), 1)]
    if rungs > 1:
        edges += [np.stack((a[:-1], a[1:]), 1), np.stack((b[:-1], b[1:]), 1)]
    return DirectedGraph(2 * rungs, np.concatenate(edges), 0)


def nested_loops(n: int, depth: int = 8) -> DirectedGraph:
    """A chain of blocks, each a ``depth``-deep loop nest.

    A block of ``2 * depth`` vertices is a straight line whose ``j``-th
    vertex from the end jumps back to the ``j``-th from the start.
    """
    block = 2 * depth
    blocks = max(n // block, 1)
    total = blocks * block
    idx = np.arange(total - 1, dtype=np.int64)
    fwd = np.stack((idx, idx + 1), 1)
    start = np.repeat(np.arange(blocks, dtype=np.int64) * block, depth)
    j = np.tile(np.arange(depth, dtype=np.int64), blocks)
    back = np.stack((start + block - 1 - j, start + j), 1)
    return DirectedGraph(total, np.concatenate((fwd, back)), 0)


def irreducible(n: int, seed=None) -> DirectedGraph:
    """Nested loops plus side entries that jump into loop bodies."""
    rng = _rng(seed)
    g = nested_loops(n)
    total = g.vertex_count
    k = max(total // 16, 1)
    src = rng.integers(0, total, k)
    dst = np.minimum(src + rng.integers(2, 8, k), total - 1)
    return DirectedGraph(total, np.concatenate((g.edges, np.stack((src, dst), 1))), 0)


def wide_diamond(chains: int = 8, length: int = 8,
                 work_seconds: float = 0.0) -> EquationSystem:
    """Source, ``chains`` independent paths of ``length`` vertices, sink.

    Each path increments ``x``; the sink joins them. There are no loops,
    so all parallelism comes from the independent paths.
    """
    n = chains * length + 2
    sink = n - 1
    edges = []
    transfer = {0: AssignConst("x", 0)}
    for c in range(chains):
        first = 1 + c * length
        edges.append((0, first))
        for i in range(length - 1):
            edges.append((first + i, first + i + 1))
        edges.append((first + length - 1, sink))
        for i in range(length):
            transfer[first + i] = AssignAdd("x", "x", c + 1)
    g = DirectedGraph(n, edges, 0)
    return EquationSystem(g, ("x",), transfer, 0, work_seconds=work_seconds)


FAMILIES = {
    "chain": lambda n, seed: chain(n),
    "ladder": lambda n, seed: ladder(n),
    "nested": lambda n, seed: nested_loops(n),
    "irreducible": irreducible,
}
