"""Times the compiled kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]
"""
from __future__ import annotations

import argparse
import json
import time

from trapinv import _kernels_py, petri
from trapinv import boolean as bf
from trapinv import pipeline as pl
from trapinv.parser import load_system

try:
    from trapinv import _kernels_c
except ImportError:
    _kernels_c = None


def _sync_net(workers: int) -> petri.PetriNet:
    S = load_system(pl.corpus_path("benchmarks", "7_sync-2.sys"))
    return petri.build_pn(S.bounded({"Worker": workers}))


def workloads():
    """(name, callable taking a kernel module) pairs."""
    names = [f"x{k}" for k in range(20)]
    xs = [bf.var(n) for n in names]
    f = bf.conj(*(bf.disj(xs[k], bf.neg(xs[(k * 7 + 3) % 20]), xs[(k + 5) % 20]) for k in range(20)))
    code = bf.compile_program(f, {n: k for k, n in enumerate(names)})
    table = _kernels_py.eval_program(code, 20)

    trap_net = _sync_net(8)  # 16 places
    tpre, tpost = trap_net.arrays()
    traps = _kernels_py.trap_table(tpre, tpost, len(trap_net.places))

    big = _sync_net(14)  # 28 places, thousands of markings
    bpre, bpost = big.arrays()

    return [
        ("eval_program 20 vars", lambda K: K.eval_program(code, 20)),
        ("minimal_masks 20 vars", lambda K: K.minimal_masks(table, 20)),
        ("trap_table 16 places", lambda K: K.trap_table(tpre, tpost, 16)),
        ("minimal_masks traps", lambda K: K.minimal_masks(traps, 16)),
        ("explore sync-2 n=14", lambda K: K.explore(bpre, bpost, big.initial, 10**6)),
    ]


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    rows = []
    for name, fn in workloads():
        py = best_of(lambda: fn(_kernels_py), args.repeat)
        c = best_of(lambda: fn(_kernels_c), args.repeat) if _kernels_c else None
        rows.append({"kernel": name, "python_ms": round(py, 3),
                     "compiled_ms": None if c is None else round(c, 3),
                     "speedup": None if not c else round(py / c, 1)})
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    if _kernels_c is None:
        print("compiled extension not built; showing the fallback only")
    print(f"{'kernel':<24} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for r in rows:
        c = "-" if r["compiled_ms"] is None else f"{r['compiled_ms']:.2f}"
        s = "-" if r["speedup"] is None else f"{r['speedup']:.1f}x"
        print(f"{r['kernel']:<24} {r['python_ms']:>10.2f} {c:>12} {s:>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
