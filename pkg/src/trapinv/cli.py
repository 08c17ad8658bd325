"""Command-line interface: ``trapinv verify`` and ``trapinv bench``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import petri
from . import pipeline as pl
from .errors import CapExceeded, InputError, NotPositive, ShapeError, TypeMismatch, UnsafeNet
from .parser import load_system


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trapinv",
                                 description="Deadlock-freedom checks via trap invariants.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify one system description")
    v.add_argument("file")
    v.add_argument("--mode", choices=pl.MODES, default="parametric")
    v.add_argument("--n", nargs="+", action="extend", metavar="TYPE=K", default=[],
                   help="instance counts for parametric types (bounded and exact modes)")
    v.add_argument("--emit-smt", metavar="PATH", help="write the verification condition as SMT-LIB2")
    v.add_argument("--theory", choices=("lia", "sets"), default="lia")
    v.add_argument("--dump-invariant", action="store_true", help="print the computed invariant")
    v.add_argument("--dot", metavar="PATH", help="write the Petri net and its reachability graph (DOT)")
    v.add_argument("--json", action="store_true", help="print a JSON report")

    b = sub.add_parser("bench", help="run the parametric check on every .sys file of a directory")
    b.add_argument("dir", nargs="?", default=None, help="corpus directory (default: bundled benchmarks)")
    b.add_argument("--json", action="store_true")
    return ap


def _print_verdict(v: pl.Verdict, dump: bool, out) -> None:
    print(f"example: {v.example}", file=out)
    print(f"mode:    {v.mode}", file=out)
    print(f"verdict: {v.result}", file=out)
    print(f"t-gen:   {v.t_gen_ms:.1f} ms", file=out)
    print(f"t-solve: {v.t_solve_ms:.1f} ms", file=out)
    if v.witness is not None:
        print(f"witness: {v.witness}", file=out)
    if v.smt_path:
        print(f"smt:     {v.smt_path}", file=out)
    if dump:
        print(f"invariant: {v.invariant}", file=out)


def cmd_verify(args, out) -> int:
    cfg = pl.RunConfig(mode=args.mode, sizes=pl.parse_sizes(args.n), emit_smt=args.emit_smt,
                       theory=args.theory)
    S = load_system(args.file)
    if args.dot:
        if cfg.mode == "parametric":
            raise InputError("--dot needs concrete instance counts: use --mode bounded or exact")
        N = petri.build_pn(pl._bounded(S, cfg))
        Path(args.dot).write_text(petri.to_dot(N, S.name) + petri.reachability_dot(N, cfg.marking_cap,
                                                                                   S.name + "-reach"),
                                  encoding="utf-8")
    v = pl.verify(S, cfg)
    if args.json:
        print(pl.report_json(v), file=out)
    else:
        _print_verdict(v, args.dump_invariant, out)
    return v.exit_code


def cmd_bench(args, out) -> int:
    rows = pl.run_benchmarks(args.dir or pl.default_corpus())
    if args.json:
        print(pl.report_json(rows), file=out)
    else:
        print(pl.benchmark_table(rows), file=out)
    return 0


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # usage errors exit with 2 in argparse, which is reserved for a found deadlock
        return pl.EXIT_INPUT_ERROR if e.code not in (0, None) else 0
    try:
        if args.command == "verify":
            return cmd_verify(args, out)
        return cmd_bench(args, out)
    except CapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return pl.EXIT_CAP
    except (InputError, NotPositive, ShapeError, TypeMismatch, UnsafeNet) as e:
        print(f"error: {e}", file=sys.stderr)
        return pl.EXIT_INPUT_ERROR
    except OSError as e:
        print(f"error: {e.filename}: {e.strerror}", file=sys.stderr)
        return pl.EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
