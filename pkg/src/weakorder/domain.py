"""Abstract values: the interval lattice, environments and equation systems."""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence, Union

from .graph import DirectedGraph, ParseError, tokenize

__all__ = [
    "NEG_INF",
    "POS_INF",
    "Interval",
    "BOTTOM",
    "TOP",
    "join",
    "meet",
    "widen",
    "leq",
    "Skip",
    "AssignConst",
    "AssignAdd",
    "Copy",
    "Statement",
    "apply_transfer",
    "Domain",
    "EnvDomain",
    "EquationSystem",
    "parse_program",
    "format_env",
]

# Bounds are 64-bit integers; the two extremes stand for the infinities.
NEG_INF = -(2 ** 63)
POS_INF = 2 ** 63 - 1


def _sat(x: int) -> int:
    if x <= NEG_INF:
        return NEG_INF
    if x >= POS_INF:
        return POS_INF
    return x


def _add_bound(b: int, c: int) -> int:
    if b in (NEG_INF, POS_INF):
        return b
    return _sat(b + c)


@dataclass(frozen=True, slots=True)
class Interval:
    """``[lo, hi]``; the empty interval is stored as ``[+inf, -inf]``."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi and (self.lo, self.hi) != (POS_INF, NEG_INF):
            object.__setattr__(self, "lo", POS_INF)
            object.__setattr__(self, "hi", NEG_INF)

    @staticmethod
    def bottom() -> "Interval":
        return BOTTOM

    @staticmethod
    def top() -> "Interval":
        return TOP

    @staticmethod
    def const(c: int) -> "Interval":
        c = _sat(int(c))
        return Interval(c, c)

    @property
    def is_bottom(self) -> bool:
        return self.lo > self.hi

    def join(self, other: "Interval") -> "Interval":
        return join(self, other)

    def widen(self, other: "Interval") -> "Interval":
        return widen(self, other)

    def leq(self, other: "Interval") -> bool:
        return leq(self, other)

    def add(self, c: int) -> "Interval":
        if self.is_bottom:
            return self
        return Interval(_add_bound(self.lo, c), _add_bound(self.hi, c))

    def __str__(self) -> str:
        if self.is_bottom:
            return "_|_"
        lo = "-inf" if self.lo == NEG_INF else str(self.lo)
        hi = "+inf" if self.hi == POS_INF else str(self.hi)
        return f"[{lo},{hi}]"


BOTTOM = Interval(POS_INF, NEG_INF)
TOP = Interval(NEG_INF, POS_INF)


def join(a: Interval, b: Interval) -> Interval:
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def meet(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), min(a.hi, b.hi))


def widen(a: Interval, b: Interval) -> Interval:
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    return Interval(NEG_INF if b.lo < a.lo else a.lo,
                    POS_INF if b.hi > a.hi else a.hi)


def leq(a: Interval, b: Interval) -> bool:
    if a.is_bottom:
        return True
    if b.is_bottom:
        return False
    return b.lo <= a.lo and a.hi <= b.hi


# -- statements ---------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    def __str__(self) -> str:
        return "skip"


@dataclass(frozen=True)
class AssignConst:
    var: str
    value: int

    def __str__(self) -> str:
        return f"{self.var} = {self.value}"


@dataclass(frozen=True)
class AssignAdd:
    var: str
    src: str
    value: int

    def __str__(self) -> str:
        op = "-" if self.value < 0 else "+"
        return f"{self.var} = {self.src} {op} {abs(self.value)}"


@dataclass(frozen=True)
class Copy:
    var: str
    src: str

    def __str__(self) -> str:
        return f"{self.var} = {self.src}"


Statement = Union[Skip, AssignConst, AssignAdd, Copy]


def _check_vars(stmt: Statement, known) -> None:
    for name in (getattr(stmt, "var", None), getattr(stmt, "src", None)):
        if name is not None and name not in known:
            raise KeyError(f"undeclared variable {name!r}")


def apply_transfer(stmt: Statement,
                   env: Mapping[str, Interval] | None) -> dict[str, Interval] | None:
    """Apply ``stmt`` to an environment; ``None`` is the bottom environment."""
    if env is None:
        return None
    _check_vars(stmt, env)
    if any(v.is_bottom for v in env.values()):
        return None
    out = dict(env)
    if isinstance(stmt, AssignConst):
        out[stmt.var] = Interval.const(stmt.value)
    elif isinstance(stmt, AssignAdd):
        out[stmt.var] = env[stmt.src].add(stmt.value)
    elif isinstance(stmt, Copy):
        out[stmt.var] = env[stmt.src]
    return out


# -- environments -------------------------------------------------------------

class Domain(Protocol):
    """Value contract the fixpoint engines rely on."""

    def bottom(self): ...
    def top(self): ...
    def join(self, a, b): ...
    def widen(self, a, b): ...
    def leq(self, a, b) -> bool: ...


class EnvDomain:
    """Interval environments over a fixed variable list.

    An environment is a tuple of non-empty intervals, or ``None`` for bottom
    (any empty component collapses the whole environment).
    """

    def __init__(self, variables: Sequence[str]):
        self.variables = tuple(variables)
        self.index = {v: i for i, v in enumerate(self.variables)}

    def bottom(self):
        return None

    def top(self):
        return (TOP,) * len(self.variables)

    def join(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        return tuple(join(x, y) for x, y in zip(a, b))

    def widen(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        return tuple(widen(x, y) for x, y in zip(a, b))

    def leq(self, a, b) -> bool:
        if a is None:
            return True
        if b is None:
            return False
        return all(leq(x, y) for x, y in zip(a, b))

    def compile(self, stmt: Statement):
        """Statement as a function on tuple environments."""
        _check_vars(stmt, self.index)
        if isinstance(stmt, Skip):
            return lambda env: env
        i = self.index[stmt.var]
        if isinstance(stmt, AssignConst):
            c = Interval.const(stmt.value)
            return lambda env: None if env is None else env[:i] + (c,) + env[i + 1:]
        j = self.index[stmt.src]
        if isinstance(stmt, AssignAdd):
            k = stmt.value
            return lambda env: None if env is None else env[:i] + (env[j].add(k),) + env[i + 1:]
        return lambda env: None if env is None else env[:i] + (env[j],) + env[i + 1:]

    def to_dict(self, env) -> dict[str, Interval] | None:
        if env is None:
            return None
        return dict(zip(self.variables, env))

    def format(self, env) -> str:
        if env is None:
            return "_|_"
        return " ".join(f"{n}={v}" for n, v in zip(self.variables, env))


def format_env(domain: EnvDomain, env) -> str:
    return domain.format(env)


@dataclass(eq=False)
class EquationSystem:
    """One equation ``X_v = F_v(join of predecessors)`` per graph vertex.

    ``work_seconds`` adds an artificial delay to every transfer evaluation;
    it exists for parallel-speedup measurements and leaves values unchanged.
    """

    graph: DirectedGraph
    variables: tuple[str, ...]
    transfer: dict[int, Statement]
    entry: int
    work_seconds: float = 0.0
    domain: EnvDomain = field(init=False)

    def __post_init__(self):
        self.variables = tuple(self.variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable name")
        self.domain = EnvDomain(self.variables)
        g = self.graph
        if self.entry is None or not (0 <= self.entry < g.vertex_count
                                      and g.vertex_mask[self.entry]):
            raise ValueError(f"entry {self.entry} is not a vertex")
        self._fn = {}
        for v in self.graph.vertices.tolist():
            self._fn[v] = self.domain.compile(self.transfer.get(v, Skip()))
        self._preds = {v: self.graph.predecessors(v).tolist()
                       for v in self.graph.vertices.tolist()}
        self._top = self.domain.top()

    def statement(self, v: int) -> Statement:
        return self.transfer.get(v, Skip())

    def evaluate(self, v: int, values) -> object:
        """``F_v`` under the value map ``values`` (a dict or list)."""
        if self.work_seconds:
            time.sleep(self.work_seconds)
        if v == self.entry:
            inp = self._top
        else:
            dom = self.domain
            inp = None
            for p in self._preds[v]:
                inp = dom.join(inp, values[p])
        return self._fn[v](inp)

    def format_program(self) -> str:
        g = self.graph
        lines = [f"vars {' '.join(self.variables)}"]
        if g.base:
            lines.insert(0, f"base {g.base}")
        lines.append(f"vertices {g.vertex_count}")
        lines.append(f"entry {g.label(self.entry)}")
        for v in g.vertices.tolist():
            s = self.transfer.get(v)
            if s is not None and not isinstance(s, Skip):
                lines.append(f"node {g.label(v)}: {s}")
        lines.extend(f"edge {g.label(u)} {g.label(v)}" for u, v in g.edges.tolist())
        return "\n".join(lines) + "\n"


# -- program text ---------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_STMT = re.compile(
    r"\s*(?:(?P<skip>skip)"
    r"|(?P<var>[A-Za-z_]\w*)\s*=\s*(?:"
    r"(?P<const>[+-]?\d+)"
    r"|(?P<src>[A-Za-z_]\w*)\s*(?:(?P<op>[+-])\s*(?P<k>[+-]?\d+))?"
    r"))\s*$")


def _parse_stmt(text: str, line: int, col: int, known: set[str]) -> Statement:
    m = _STMT.match(text)
    if not m:
        raise ParseError(line, col, f"cannot parse statement {text.strip()!r}")
    if m.group("skip"):
        return Skip()
    var = m.group("var")
    off = col + text.index(var)
    if var not in known:
        raise ParseError(line, off, f"undeclared variable {var!r}")
    if m.group("const") is not None:
        return AssignConst(var, int(m.group("const")))
    src = m.group("src")
    if src not in known:
        raise ParseError(line, col + m.start("src"), f"undeclared variable {src!r}")
    if m.group("op") is None:
        return Copy(var, src)
    k = int(m.group("k"))
    return AssignAdd(var, src, k if m.group("op") == "+" else -k)


def parse_program(text: str) -> EquationSystem:
    """Parse ``vars``/``node K: stmt``/``edge``/``entry`` lines into a system."""
    from .graph import _assemble, _int_token

    variables: list[str] = []
    stmts: list[tuple[int, int, int, str]] = []
    edges = []
    count = None
    entry = None
    base = 0
    lines = text.splitlines()
    for ln, toks in tokenize(text):
        col, key = toks[0]
        args = toks[1:]
        if key == "vars":
            for c, name in args:
                if not _IDENT.match(name):
                    raise ParseError(ln, c, f"bad variable name {name!r}")
                if name in variables:
                    raise ParseError(ln, c, f"variable {name!r} declared twice")
                variables.append(name)
        elif key == "node":
            raw = lines[ln - 1].split("#", 1)[0]
            head = raw.find(":", col)
            if head < 0 or not args:
                raise ParseError(ln, col, "expected 'node K: statement'")
            label_txt = raw[col - 1 + 4:head].strip()
            lab = _int_token(label_txt, ln, args[0][0], "node id")
            stmts.append((ln, args[0][0], lab, raw[head + 1:], head + 2))
        elif key in ("edge", "entry", "vertices", "base"):
            arity = 2 if key == "edge" else 1
            if len(args) != arity:
                raise ParseError(ln, col, f"{key} takes {arity} argument(s)")
            vals = [(c, _int_token(t, ln, c, "value")) for c, t in args]
            if key == "edge":
                edges.append((ln, vals))
            elif key == "entry":
                entry = (ln,) + vals[0]
            elif key == "vertices":
                count = vals[0]
            else:
                base = vals[0][1]
        else:
            raise ParseError(ln, col, f"unknown directive {key!r}")
    if entry is None:
        raise ParseError(max(len(lines), 1), 1, "missing 'entry' line")
    if count is None:
        top = max([lab for _, _, lab, _, _ in stmts], default=base - 1)
        count = (1, top - base + 1)
        for _, vals in edges:
            for _, lab in vals:
                count = (1, max(count[1], lab - base + 1))
    g = _assemble(count, entry, base, edges)
    known = set(variables)
    transfer: dict[int, Statement] = {}
    for ln, c, lab, body, bcol in stmts:
        v = lab - base
        if not 0 <= v < g.vertex_count:
            raise ParseError(ln, c, f"node {lab} out of range")
        if v in transfer:
            raise ParseError(ln, c, f"node {lab} has two statements")
        transfer[v] = _parse_stmt(body, ln, bcol, known)
    return EquationSystem(g, tuple(variables), transfer, g.entry)
