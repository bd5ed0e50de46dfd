"""Fixpoint engines: the recursive strategy over a WTO and the concurrent
rule-driven engine over a WPO."""

from __future__ import annotations

import random
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .domain import EquationSystem
from .wpo import Wpo
from .wto import Wto

__all__ = [
    "ValueMap",
    "CountMap",
    "LeakError",
    "Firing",
    "solve_sequential",
    "solve_concurrent",
    "widening_points",
    "trace_schedule",
    "kleene_dag",
    "is_post_fixpoint",
]


@dataclass(eq=False)
class ValueMap:
    """Final abstract value of every vertex of a system."""

    system: EquationSystem
    values: dict[int, object]

    def __getitem__(self, v: int):
        return self.values[v]

    def env(self, v: int):
        """Value of ``v`` as a ``{variable: Interval}`` dict (``None`` if bottom)."""
        return self.system.domain.to_dict(self.values[v])

    def dump(self) -> str:
        g = self.system.graph
        fmt = self.system.domain.format
        return "".join(f"{g.label(v)}: {fmt(self.values[v])}\n"
                       for v in sorted(self.values))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ValueMap):
            return NotImplemented
        return self.values == other.values

    __hash__ = None


class CountMap:
    """Executed-scheduling-predecessor counts, bounded by the predecessor totals."""

    def __init__(self, limits: np.ndarray):
        self.limits = limits
        self.counts = np.zeros(len(limits), np.int64)

    def __getitem__(self, node: int) -> int:
        return int(self.counts[node])

    def reset(self, node: int, value: int = 0) -> None:
        assert 0 <= value <= self.limits[node], "count out of range"
        self.counts[node] = value

    def bump(self, node: int) -> bool:
        """Increment; report whether the node just became ready."""
        c = self.counts[node] + 1
        assert c <= self.limits[node], f"count of node {node} exceeds its predecessors"
        self.counts[node] = c
        return c == self.limits[node]

    def is_full(self, node: int) -> bool:
        return self.counts[node] == self.limits[node]


class LeakError(AssertionError):
    """A value inside an unstabilized component was read from outside it."""


def widening_points(wpo: Wpo) -> set[int]:
    """Component heads: the image of the stabilization relation."""
    return set(wpo.stabilization[:, 1].tolist())


def _check_match(sys: EquationSystem, n: int, vertices: np.ndarray, what: str) -> None:
    g = sys.graph
    if n != g.vertex_count or not np.array_equal(vertices, g.vertices):
        raise ValueError(f"{what} was not built for this system's graph")


# -- sequential ---------------------------------------------------------------

def _nest(order: list[int], n: int, heads: set[int]) -> list:
    """Bourdoncle string as nested lists: ints and ``(head, body)`` pairs."""
    stack: list[tuple[int | None, list]] = [(None, [])]
    for v in order:
        if v >= n:
            h, body = stack.pop()
            stack[-1][1].append((h, body))
        elif v in heads:
            stack.append((v, []))
        else:
            stack[-1][1].append(v)
    assert len(stack) == 1, "unbalanced order"
    return stack[0][1]


def solve_sequential(sys: EquationSystem, wto: Wto) -> ValueMap:
    """Recursive iteration strategy over ``wto``, widening at heads."""
    _check_match(sys, wto.n, wto.base.vertices, "WTO")
    dom = sys.domain
    X = {v: dom.bottom() for v in sys.graph.vertices.tolist()}
    X[sys.entry] = dom.top()
    heads = widening_points(wto.base)
    evaluate = sys.evaluate

    def run(items) -> None:
        for it in items:
            if isinstance(it, tuple):
                h, body = it
                while True:
                    X[h] = dom.widen(X[h], evaluate(h, X))
                    run(body)
                    if dom.leq(evaluate(h, X), X[h]):
                        break
            else:
                X[it] = evaluate(it, X)

    run(_nest(wto.order.tolist(), wto.n, heads))
    return ValueMap(sys, X)


def kleene_dag(sys: EquationSystem) -> ValueMap:
    """Single topological pass; exact on acyclic graphs."""
    g = sys.graph
    if not g.is_acyclic():
        raise ValueError("graph has a cycle")
    dom = sys.domain
    X = {v: dom.bottom() for v in g.vertices.tolist()}
    indeg = {v: len(g.predecessors(v)) for v in X}
    ready = sorted(v for v, d in indeg.items() if d == 0)
    while ready:
        v = ready.pop()
        X[v] = sys.evaluate(v, X)
        for w in g.successors(v).tolist():
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return ValueMap(sys, X)


def is_post_fixpoint(result: ValueMap) -> list[int]:
    """Vertices whose equation is not satisfied (empty for a post-fixpoint)."""
    sys = result.system
    dom = sys.domain
    return [v for v in sorted(result.values)
            if not dom.leq(sys.evaluate(v, result.values), result.values[v])]


# -- concurrent ---------------------------------------------------------------

class Firing(NamedTuple):
    step: int
    node: int
    rule: str
    resets: dict | None = None


class _Engine:
    """Shared state of one concurrent run: value map, count map and rules."""

    def __init__(self, sys: EquationSystem, wpo: Wpo, check_leaks: bool = False,
                 log: list | None = None):
        _check_match(sys, wpo.n, wpo.vertices, "WPO")
        self.sys = sys
        self.wpo = wpo
        n = wpo.n
        dom = sys.domain
        self.X = {v: dom.bottom() for v in sys.graph.vertices.tolist()}
        self.X[sys.entry] = dom.top()
        limits = np.zeros(2 * n, np.int64)
        for u, v in wpo.scheduling.tolist():
            limits[v] += 1
        self.N = CountMap(limits)
        self.succ = {int(u): wpo.successors(u) for u in wpo.nodes.tolist()}
        self.heads = widening_points(wpo)
        self.comp = {wpo.exit_of(h): sorted(c) for h, c in wpo.components.items()}
        self.outer = wpo.outer_sched_preds
        self.lock = threading.Lock()
        self.log = log
        self.check_leaks = check_leaks
        if check_leaks:
            self.open: set[int] = set()
            self.members = wpo.components
            self.enclosing = {v: wpo.enclosing_heads(v) for v in self.X}
            self.preds = {v: sys.graph.predecessors(v).tolist() for v in self.X}

    def initial(self) -> list[int]:
        return [v for v in self.wpo.nodes.tolist() if self.N.is_full(v)]

    def _reads(self, reader: int, v: int) -> None:
        # every value F_v reads must not sit in a component that is still open
        # unless the reader belongs to that component or is its exit
        for p in self.preds[v]:
            for h in self.enclosing[p]:
                if h in self.open and reader not in self.members[h]:
                    raise LeakError(f"node {self.wpo.label(reader)} read "
                                    f"{self.wpo.label(p)} inside open component "
                                    f"{self.wpo.label(h)}")

    def fire(self, v: int, step: int = 0) -> list[int]:
        """Apply the rule enabled at ``v``; return the nodes it made ready."""
        sys, dom, N = self.sys, self.sys.domain, self.N
        resets = None
        if v < self.wpo.n:
            with self.lock:
                N.reset(v)
                if self.check_leaks:
                    self._reads(v, v)
                    if v in self.heads:
                        self.open.add(v)
            val = sys.evaluate(v, self.X)
            if v in self.heads:
                val = dom.widen(self.X[v], val)
            self.X[v] = val
            rule, notify = "NonExit", True
        else:
            h = self.wpo.head_of(v)
            if self.check_leaks:
                with self.lock:
                    self._reads(v, h)
            stable = dom.leq(sys.evaluate(h, self.X), self.X[h])
            with self.lock:
                N.reset(v)
                if stable:
                    rule, notify = "CompStabilized", True
                    if self.check_leaks:
                        self.open.discard(h)
                else:
                    rule, notify = "CompNotStabilized", False
                    ready = []
                    resets = {}
                    for u in self.comp[v]:
                        c = self.outer[(u, v)]
                        N.reset(u, c)
                        resets[u] = c
                        if N.is_full(u):
                            ready.append(u)
        if notify:
            with self.lock:
                ready = [w for w in self.succ.get(v, ()) if N.bump(w)]
        if self.log is not None:
            self.log.append(Firing(step, v, rule, resets))
        return ready


def _run_pool(eng: _Engine, workers: int) -> None:
    cond = threading.Condition()
    ready = deque(eng.initial())
    state = {"active": 0, "error": None}

    def work() -> None:
        while True:
            with cond:
                while not ready and state["active"] and state["error"] is None:
                    cond.wait()
                if not ready or state["error"] is not None:
                    cond.notify_all()
                    return
                v = ready.popleft()
                state["active"] += 1
            try:
                # keep one ready successor for this worker, hand off the rest
                while v is not None:
                    nxt = eng.fire(v)
                    v = nxt[0] if nxt else None
                    if len(nxt) > 1:
                        with cond:
                            ready.extend(nxt[1:])
                            cond.notify(len(nxt) - 1)
            except BaseException as exc:  # surfaced in the caller
                with cond:
                    state["error"] = exc
            with cond:
                state["active"] -= 1
                cond.notify_all()

    threads = [threading.Thread(target=work, daemon=True) for _ in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if state["error"] is not None:
        raise state["error"]


def solve_concurrent(sys: EquationSystem, wpo: Wpo, workers: int = 1,
                     check_leaks: bool = False) -> ValueMap:
    """Concurrent fixpoint over ``wpo`` with ``workers`` threads.

    The result does not depend on ``workers`` or on thread interleaving.
    ``check_leaks`` raises :class:`LeakError` if a value inside a component is
    read from outside before the component has stabilized.
    """
    if workers < 1:
        raise ValueError("workers must be positive")
    eng = _Engine(sys, wpo, check_leaks)
    if workers == 1:
        ready = eng.initial()
        while ready:
            ready.extend(reversed(eng.fire(ready.pop())))
    else:
        _run_pool(eng, workers)
    return ValueMap(sys, eng.X)


def trace_schedule(sys: EquationSystem, wpo: Wpo, workers: int = 1,
                   seed: int | None = None) -> list[Firing]:
    """Replay the rules in lock-step rounds and log every firing.

    Each round fires up to ``workers`` ready nodes (all of them when
    ``workers`` is 0). With a seed the nodes of a round are drawn at random
    from the ready set; otherwise the smallest ids go first.
    """
    log: list[Firing] = []
    eng = _Engine(sys, wpo, log=log)
    rng = random.Random(seed)
    ready = sorted(eng.initial())
    step = 0
    while ready:
        step += 1
        k = len(ready) if workers == 0 else min(workers, len(ready))
        if seed is None:
            batch, ready = ready[:k], ready[k:]
        else:
            batch = sorted(rng.sample(ready, k))
            chosen = set(batch)
            ready = [v for v in ready if v not in chosen]
        new = []
        for v in batch:
            new.extend(eng.fire(v, step))
        ready = sorted(set(ready) | set(new))
    return log
