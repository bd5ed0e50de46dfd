"""Command-line interface: ``weakorder {wpo,wto,analyze,validate,bench}``."""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from typing import Sequence

from .domain import AssignAdd, EquationSystem, parse_program
from .fixpoint import solve_concurrent, solve_sequential
from .generators import FAMILIES
from .graph import DirectedGraph, ParseError, parse_graph, tokenize
from .wpo import construct_wpo_bu, validate_axioms, wpo_to_dot
from .wto import construct_wto_bu, wto_violations

__all__ = ["RunConfig", "RunResult", "run", "main", "SCALING_LIMIT"]

COMMANDS = ("wpo", "wto", "analyze", "validate", "bench")
# allowed construction-time growth per tenfold size increase
SCALING_LIMIT = 15.0


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    workers: int = 1
    lift: bool = False
    format: str = "text"
    repeats: int = 1
    seed: int = 0
    sequential: bool = False
    check_determinism: int | None = None
    sizes: tuple[int, ...] = (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6)
    families: tuple[str, ...] = tuple(FAMILIES)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.check_determinism is not None and self.check_determinism < 1:
            raise ValueError("--check-determinism needs a positive count")
        if self.format not in ("text", "dot"):
            raise ValueError(f"unknown format {self.format!r}")


@dataclass(frozen=True)
class RunResult:
    code: int
    output: bytes
    errors: bytes = b""


def _is_program(text: str) -> bool:
    return any(toks[0][1] in ("vars", "node") for _, toks in tokenize(text))


def _load_graph(text: str) -> DirectedGraph:
    return parse_program(text).graph if _is_program(text) else parse_graph(text)


def _solve(cfg: RunConfig, system: EquationSystem, wpo, wto) -> str:
    if cfg.sequential:
        return solve_sequential(system, wto).dump()
    return solve_concurrent(system, wpo, cfg.workers).dump()


def _analyze(cfg: RunConfig, text: str) -> RunResult:
    if cfg.format == "dot":
        return RunResult(2, b"", b"error: analyze has no dot output\n")
    system = parse_program(text)
    g = system.graph
    wpo = construct_wpo_bu(g)
    wto = construct_wto_bu(g)
    dump = _solve(cfg, system, wpo, wto)
    out = dump
    code = 0
    if cfg.check_determinism:
        r = cfg.check_determinism
        reference = solve_sequential(system, wto).dump()
        same = sum(_solve(cfg, system, wpo, wto) == dump for _ in range(r))
        out += f"{same}/{r} identical\n"
        if dump != reference:
            out += "differs from the sequential strategy\n"
        if same != r or dump != reference:
            code = 1
    return RunResult(code, out.encode())


def _validate(cfg: RunConfig, text: str) -> RunResult:
    g = _load_graph(text)
    wpo = construct_wpo_bu(g, lift=cfg.lift)
    problems = [f"{v.axiom}: {v.message}" for v in validate_axioms(wpo, g)]
    problems += [f"WTO: {m}" for m in wto_violations(construct_wto_bu(g), g)]
    if problems:
        return RunResult(1, "".join(p + "\n" for p in problems).encode())
    return RunResult(0, b"ok\n")


def _time(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def scaling_ratios(sizes: Sequence[int], seconds: Sequence[float]) -> list[float]:
    """Time growth per tenfold size increase between consecutive sizes."""
    out = []
    for (n0, t0), (n1, t1) in zip(zip(sizes, seconds), zip(sizes[1:], seconds[1:])):
        decades = math.log10(n1 / n0)
        out.append((t1 / t0) ** (1.0 / decades) if t0 > 0 and decades > 0 else math.inf)
    return out


def _bench(cfg: RunConfig) -> RunResult:
    lines = [f"{'family':<12} {'vertices':>9} {'wpo_bu_s':>10} {'wto_bu_s':>10} {'solve_s':>10}"]
    construct: dict[str, list[float]] = {}
    for fam in cfg.families:
        make = FAMILIES[fam]
        for n in cfg.sizes:
            g = make(n, cfg.seed)
            construct_wpo_bu(g)  # warm the compiled kernels
            t_wpo = _time(lambda: construct_wpo_bu(g), cfg.repeats)
            t_wto = _time(lambda: construct_wto_bu(g), cfg.repeats)
            construct.setdefault(fam, []).append(t_wpo)
            solve = "-"
            if g.vertex_count <= 10 ** 4:
                system = EquationSystem(g, ("x",), {v: AssignAdd("x", "x", 1)
                                                    for v in g.vertices.tolist()}, g.entry)
                w = construct_wpo_bu(g)
                solve = f"{_time(lambda: solve_concurrent(system, w, cfg.workers), 1):10.4f}"
            lines.append(f"{fam:<12} {g.vertex_count:>9} {t_wpo:10.4f} {t_wto:10.4f} {solve:>10}")
    if "nested" in construct and len(cfg.sizes) > 1:
        sizes = [FAMILIES["nested"](n, cfg.seed).vertex_count for n in cfg.sizes]
        ratios = scaling_ratios(sizes, construct["nested"])
        worst = max(ratios)
        verdict = "PASS" if worst <= SCALING_LIMIT else "FAIL"
        lines.append("nested-loop WPO construction growth per decade: "
                     + ", ".join(f"{r:.2f}" for r in ratios)
                     + f" (limit {SCALING_LIMIT:g}) {verdict}")
    return RunResult(0, ("\n".join(lines) + "\n").encode())


def run(cfg: RunConfig, data: bytes | None = None) -> RunResult:
    """Execute one command on ``data`` (the input file contents)."""
    try:
        if cfg.command == "bench":
            return _bench(cfg)
        text = (data or b"").decode("utf-8")
        if cfg.command == "wpo":
            w = construct_wpo_bu(_load_graph(text), lift=cfg.lift)
            out = wpo_to_dot(w) if cfg.format == "dot" else w.dump()
        elif cfg.command == "wto":
            w = construct_wto_bu(_load_graph(text))
            out = wpo_to_dot(w.base) if cfg.format == "dot" else f"{w}\n"
        elif cfg.command == "analyze":
            return _analyze(cfg, text)
        else:
            return _validate(cfg, text)
    except ParseError as exc:
        return RunResult(2, b"", f"error: line {exc.line}, column {exc.column}: "
                                 f"{exc.message}\n".encode())
    except UnicodeDecodeError as exc:
        return RunResult(2, b"", f"error: input is not UTF-8 ({exc.reason})\n".encode())
    return RunResult(0, out.encode())


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakorder",
                                description="Weak partial orders and concurrent fixpoints.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, desc in (("wpo", "print the WPO of a graph"),
                       ("wto", "print the WTO of a graph as a parenthesized string"),
                       ("analyze", "solve an interval program and print its values"),
                       ("validate", "check the WPO/WTO axioms on a graph")):
        s = sub.add_parser(name, help=desc)
        s.add_argument("input", help="input file, or - for stdin")
        s.add_argument("--format", choices=("text", "dot"), default="text")
        s.add_argument("--lift", action="store_true",
                       help="add the extra head edges used for linearization")
        s.add_argument("--workers", type=_positive, default=1)
        s.add_argument("--seed", type=int, default=0)
        if name == "analyze":
            s.add_argument("--sequential", action="store_true",
                           help="use the recursive strategy instead of the concurrent engine")
            s.add_argument("--check-determinism", type=_positive, metavar="R",
                           help="solve R times and compare with the sequential result")
    b = sub.add_parser("bench", help="time constructions over generated graph families")
    b.add_argument("--sizes", default="1000,10000,100000,1000000",
                   help="comma-separated vertex counts")
    b.add_argument("--families", default=",".join(FAMILIES))
    b.add_argument("--repeats", type=_positive, default=3)
    b.add_argument("--workers", type=_positive, default=1)
    b.add_argument("--seed", type=int, default=0)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    kw = dict(command=args.command, workers=args.workers, seed=args.seed)
    if args.command == "bench":
        fams = tuple(f for f in args.families.split(",") if f)
        unknown = [f for f in fams if f not in FAMILIES]
        if unknown:
            print(f"error: unknown family {unknown[0]!r}", file=sys.stderr)
            return 2
        kw.update(sizes=tuple(int(s) for s in args.sizes.split(",") if s),
                  families=fams, repeats=args.repeats)
        data = None
    else:
        kw.update(input=args.input, lift=args.lift, format=args.format)
        if args.command == "analyze":
            kw.update(sequential=args.sequential,
                      check_determinism=args.check_determinism)
        try:
            if args.input == "-":
                data = sys.stdin.buffer.read()
            else:
                with open(args.input, "rb") as fh:
                    data = fh.read()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    result = run(RunConfig(**kw), data)
    sys.stdout.buffer.write(result.output)
    sys.stdout.flush()
    if result.errors:
        sys.stderr.buffer.write(result.errors)
    return result.code


if __name__ == "__main__":
    raise SystemExit(main())
