"""Command line entry point.

Exit codes: 0 success, 2 usage error, 3 cap or precondition error,
4 a check failed (replay mismatch, failed certificate or audit).
"""

from __future__ import annotations

import argparse
import sys

from . import experiments as ex
from .exact import CapExceeded
from .game import play_online_ramsey, play_subgraph_query
from .graph import named_graph
from .harness import NonConvergence, RunManifest
from .painters import LabelOverflow, TurnLimitExceeded

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_CHECK = 0, 2, 3, 4


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _words(text: str) -> list[str]:
    return [x for x in text.split(",") if x]


def _cells(text: str) -> list[list[int]]:
    return [[int(a) for a in c.split(":")] for c in text.split(",") if c]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    common.add_argument("--trials", type=int, default=None, help="trial count (experiment default if omitted)")
    common.add_argument("--out", default=None, help="output path; stdout when omitted")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--manifest", default=None, help="manifest path (written on runs, read by replay)")

    parser = argparse.ArgumentParser(prog="onlineramsey", description="Online Ramsey and subgraph query experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="play one game and print its transcript")
    s.add_argument("--game", choices=("ramsey", "query"), default="ramsey")
    s.add_argument("--builder", default="branching")
    s.add_argument("--painter", default="random", help="random, red, blue, alteration or alteration:lazy")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--p", type=float, default=None)
    s.add_argument("--r", type=int, default=None, help="alteration painter label pool")
    s.add_argument("--target", default="K3")
    s.add_argument("--turn-cap", type=int, default=1000)

    s = sub.add_parser("estimate-f", parents=[common], help="empirical f over a grid of p")
    s.add_argument("--target", default="K3")
    s.add_argument("--p", type=_floats, required=True, help="comma separated")
    s.add_argument("--builder", default="triangle")
    s.add_argument("--c-T", dest="c_T", type=float, default=None)

    s = sub.add_parser("certify", parents=[common], help="best certified lower bound on the online Ramsey number")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--per-decade", type=int, default=200)

    s = sub.add_parser("audit-weights", parents=[common], help="final weight audit against random painters")
    s.add_argument("--builders", type=_words, default=list(ex.AUDIT_BUILDERS))
    s.add_argument("--cells", type=_cells, default=[[3, 1], [4, 1], [4, 2]], help="m:c pairs, comma separated")
    s.add_argument("--p", type=_floats, default=[0.3, 0.5])
    s.add_argument("--N", type=int, default=20)

    s = sub.add_parser("solve-exact", parents=[common], help="exact game values on tiny instances")
    s.add_argument("--kind", choices=("query", "ramsey", "random-ramsey", "sandwich", "brute-compare"), default="query")
    s.add_argument("--target", default="K3")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--p", default="1/2", help="probability; 'a/b' keeps exact arithmetic")
    s.add_argument("--vertex-budget", type=int, default=None)

    s = sub.add_parser("tabulate-bounds", parents=[common], help="closed-form bound table")
    s.add_argument("--m", type=_ints, default=[3, 4, 5])
    s.add_argument("--n", type=_ints, default=[10, 20, 40])

    sub.add_parser("replay", parents=[common], help="re-run a manifest and compare outputs byte for byte")
    return parser


def _experiment_call(args) -> tuple[str, dict]:
    c = args.command
    if c == "estimate-f":
        return "estimate-f", {"target": args.target, "ps": args.p, "builder": args.builder, "c_T": args.c_T}
    if c == "certify":
        return "certify", {"m": args.m, "n": args.n, "per_decade": args.per_decade}
    if c == "audit-weights":
        return "audit-weights", {"builders": args.builders, "cells": args.cells, "ps": args.p, "N": args.N}
    if c == "tabulate-bounds":
        return "tabulate-bounds", {"ms": args.m, "ns": args.n}
    if c == "solve-exact":
        vb = args.vertex_budget
        if args.kind == "query":
            return "exact-f", {"target": args.target, "p": args.p, "vertex_budget": vb or 8}
        if args.kind == "ramsey":
            return "exact-ramsey", {"m": args.m, "n": args.n, "vertex_budgets": [vb or 6]}
        if args.kind == "random-ramsey":
            return "exact-random-ramsey", {"m": args.m, "n": args.n, "p": args.p, "vertex_budget": vb or 6}
        if args.kind == "sandwich":
            return "sandwich", {"m": args.m, "n": args.n, "ps": [args.p], "vertex_budget": vb or 8}
        return "exact-vs-brute", {"target": args.target, "ps": [args.p], "vertex_budgets": [vb or 5]}
    raise AssertionError(c)


def _failed_checks(rows) -> bool:
    for r in rows:
        for key in ("holds", "verdict", "passed", "equal"):
            if r.get(key) is False:
                return True
    return False


def _simulate(args) -> str:
    if args.game == "query":
        target = named_graph(args.target)
        p = 0.5 if args.p is None else args.p
        builder = ex.make_query_builder(args.builder, target, p, N=args.turn_cap)
        t = play_subgraph_query(builder, target, p, args.turn_cap, args.seed)
    else:
        builder = ex.make_ramsey_builder(args.builder, args.m, args.n)
        painter = ex.make_painter(args.painter, n=args.n, p=args.p, r=args.r)
        t = play_online_ramsey(builder, painter, args.m, args.n, args.turn_cap, args.seed)
    return t.dumps()


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _run(args) -> int:
    if args.command == "simulate":
        _emit(_simulate(args), args.out)
        return EXIT_OK
    if args.command == "replay":
        if not args.manifest:
            print("replay needs --manifest", file=sys.stderr)
            return EXIT_USAGE
        with open(args.manifest) as fh:
            man = RunManifest.from_json(fh.read())
        ok, text = ex.replay(man)
        if args.out:
            _emit(text, args.out)
        print(("identical" if ok else "MISMATCH") + f" {man.experiment} seed={man.seed}", file=sys.stderr)
        return EXIT_OK if ok else EXIT_CHECK

    name, params = _experiment_call(args)
    if args.out is not None:
        rows, _ = ex.run_to_files(name, params, args.seed, args.out, args.manifest, args.trials, args.format)
    else:
        rows, text, man = ex.run(name, params, args.seed, args.trials, args.format)
        sys.stdout.write(text)
        if args.manifest:
            man.outputs = {"-": ex.sha256(text)}
            with open(args.manifest, "w") as fh:
                fh.write(man.to_json())
    if name == "estimate-f" and len(rows) >= 4:
        slope, se = ex.fitted_slope(rows)
        print(f"slope {slope:.4f} +/- {se:.4f}", file=sys.stderr)
    return EXIT_CHECK if _failed_checks(rows) else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return _run(args)
    except (CapExceeded, NonConvergence, LabelOverflow, TurnLimitExceeded, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
