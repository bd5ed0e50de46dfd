"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations


import numpy as np


def reachability(n: int, edges) -> np.ndarray:
    """``R[u, v]`` is true when a path of length >= 1 leads from u to v."""
    r = np.zeros((n, n), bool)
    for u, v in edges:
        r[u, v] = True
    for k in range(n):
        r |= np.outer(r[:, k], r[k, :])
    return r


def scc_partition(n: int, edges) -> set[frozenset[int]]:
    r = reachability(n, edges)
    seen, out = set(), set()
    for v in range(n):
        if v in seen:
            continue
        comp = {v} | {u for u in range(n) if r[v, u] and r[u, v]}
        seen |= comp
        out.add(frozenset(comp))
    return out


def recursive_dfs(n: int, edges, entry):
    """Plain recursive DFS; roots: entry first, then ascending ids."""
    succ = {v: sorted({b for a, b in edges if a == v}) for v in range(n)}
    dfn, post, parent, kind = {}, {}, {}, {}
    on_path = set()

    def visit(v):
        dfn[v] = len(dfn)
        on_path.add(v)
        for w in succ[v]:
            if w not in dfn:
                parent[w] = v
                kind[(v, w)] = "tree"
                visit(w)
            elif w in on_path:
                kind[(v, w)] = "back"
            elif dfn[w] > dfn[v]:
                kind[(v, w)] = "forward"
            else:
                kind[(v, w)] = "cross"
        on_path.discard(v)
        post[v] = len(post)

    roots = ([entry] if entry is not None else []) + list(range(n))
    for r in roots:
        if r not in dfn:
            parent[r] = -1
            visit(r)
    return dfn, post, parent, kind


def naive_lca(parent: dict[int, int], u: int, v: int) -> int:
    anc = []
    while u != -1:
        anc.append(u)
        u = parent[u]
    seen = set(anc)
    while v != -1:
        if v in seen:
            return v
        v = parent[v]
    return -1


def is_acyclic(n: int, edges) -> bool:
    r = reachability(n, edges)
    return not r.diagonal().any()


def simple_cycles(n: int, edges, limit: int = 5000):
    """Vertex sets of simple cycles, by DFS from each minimum vertex."""
    succ = {v: sorted({b for a, b in edges if a == v}) for v in range(n)}
    out = []
    for s in range(n):
        stack = [(s, [s])]
        while stack and len(out) < limit:
            v, path = stack.pop()
            for w in succ[v]:
                if w == s:
                    out.append(frozenset(path))
                elif w > s and w not in path:
                    stack.append((w, path + [w]))
    return out


def interval_set(lo: int, hi: int) -> frozenset[int]:
    return frozenset(range(lo, hi + 1))


def recursive_strategy(system, wto_text: str):
    """Recursive iteration driven by a parsed Bourdoncle string.

    Works on ``{var: Interval}`` dicts via ``apply_transfer`` so it shares
    no code with the engines beyond the interval operations.
    """
    from weakorder.domain import TOP, apply_transfer, join, leq, widen

    g = system.graph
    base = g.base
    names = system.variables
    top = {v: TOP for v in names}
    X = {v: None for v in g.vertices.tolist()}
    X[system.entry] = dict(top)

    def djoin(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return {k: join(a[k], b[k]) for k in a}

    def F(v):
        if v == system.entry:
            inp = dict(top)
        else:
            inp = None
            for p in g.predecessors(v).tolist():
                inp = djoin(inp, X[p])
        return apply_transfer(system.statement(v), inp)

    def dleq(a, b):
        return a is None or (b is not None and all(leq(a[k], b[k]) for k in a))

    def dwiden(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return {k: widen(a[k], b[k]) for k in a}

    toks = wto_text.replace("(", " ( ").replace(")", " ) ").split()

    def parse(i):
        items = []
        while i < len(toks) and toks[i] != ")":
            if toks[i] == "(":
                head = int(toks[i + 1]) - base
                body, i = parse(i + 2)
                items.append((head, body))
                i += 1
            else:
                items.append(int(toks[i]) - base)
                i += 1
        return items, i

    def run(items):
        for it in items:
            if isinstance(it, tuple):
                h, body = it
                while True:
                    X[h] = dwiden(X[h], F(h))
                    run(body)
                    if dleq(F(h), X[h]):
                        break
            else:
                X[it] = F(it)

    run(parse(0)[0])
    return X
