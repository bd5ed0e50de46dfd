#!/usr/bin/env python3
"""Compare compiled kernels against the pure-Python fallback.

Each mode runs in its own interpreter because the fallback is picked at
import time from WEAKORDER_NO_JIT. Both modes build the same WPO and WTO,
and the script checks that their outputs hash identically.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 1000,10000] [--repeats 3]
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time


def measure(sizes: list[int], repeats: int) -> dict:
    from weakorder import _jit
    from weakorder.generators import irreducible
    from weakorder.wpo import construct_wpo_bu
    from weakorder.wto import construct_wto_bu

    out = {"jit": _jit.JIT_ENABLED, "rows": []}
    for n in sizes:
        g = irreducible(n, seed=0)
        construct_wpo_bu(g)  # compile outside the timed region
        best = float("inf")
        for _ in range(repeats):
            t = time.perf_counter()
            w = construct_wpo_bu(g)
            best = min(best, time.perf_counter() - t)
        digest = hashlib.sha256((w.dump() + str(construct_wto_bu(g))).encode()).hexdigest()
        out["rows"].append({"n": g.vertex_count, "seconds": best, "digest": digest})
    return out


def child(mode: str, sizes: list[int], repeats: int) -> dict:
    env = dict(os.environ)
    env["WEAKORDER_NO_JIT"] = "1" if mode == "python" else "0"
    cmd = [sys.executable, __file__, "--child", "--sizes", ",".join(map(str, sizes)),
           "--repeats", str(repeats)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000,50000")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s]
    if args.child:
        print(json.dumps(measure(sizes, args.repeats)))
        return 0

    jit = child("numba", sizes, args.repeats)
    py = child("python", sizes, args.repeats)
    if not jit["jit"]:
        print("numba is not available; both columns use the fallback")
    print(f"{'vertices':>9} {'numba_s':>10} {'python_s':>10} {'speedup':>8}  same")
    ok = True
    for a, b in zip(jit["rows"], py["rows"]):
        same = a["digest"] == b["digest"]
        ok &= same
        print(f"{a['n']:>9} {a['seconds']:10.4f} {b['seconds']:10.4f} "
              f"{b['seconds'] / a['seconds']:8.1f}  {'yes' if same else 'NO'}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
