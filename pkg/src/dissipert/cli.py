"""Command line entry point ``dissipert``.

Exit codes: 0 success, 1 theorem violation (or slope outside tolerance for
``sweep``), 2 usage or input error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import ConfigError, DissipertError, ReplayCorrupt
from . import harness

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _cmd_run(args, sweep_only=False):
    cfg = harness.load_config(args.config)
    if args.output:
        cfg.output = args.output
    if sweep_only and cfg.sweep is None:
        cfg.sweep = harness.SweepSpec()
    log = None
    if args.verbose:
        log = lambda th, n, trial, bc: print(
            f"{th} n={n} trial={trial} ratio={'-' if bc is None else f'{bc.ratio:.3e}'}",
            file=sys.stderr)
    report = harness.run(cfg, sweep_only=sweep_only, log=log)
    print(f"{'theorem':<8} {'checks':>6} {'pass':>5} {'fail':>5} {'defer':>5} "
          f"{'max ratio':>12} {'slope':>8} {'expect':>7}")
    for s in report.summary:
        mr = "-" if s["max_ratio"] is None else f"{s['max_ratio']:.4e}"
        sl = "-" if s["slope"] is None else f"{s['slope']:.4f}"
        ex = "-" if s["expected_slope"] is None else f"{s['expected_slope']:.3g}"
        print(f"{s['theorem_id']:<8} {s['checks']:>6} {s['passed']:>5} {s['failed']:>5} "
              f"{s['deferred']:>5} {mr:>12} {sl:>8} {ex:>7}")
    for bc, man in report.failures:
        print(f"VIOLATION {bc.theorem_id} ratio={bc.ratio:.17g} replay: {man}")
    print(f"output: {report.output}")
    if report.failures:
        return EXIT_VIOLATION
    if sweep_only and any(s["slope_ok"] is False for s in report.summary):
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_replay(args):
    bc = harness.replay(args.instance, tol_bound=args.tol_bound)
    verdict = {True: "passed", False: "FAILED", None: "deferred"}[bc.passed]
    print(f"{bc.theorem_id} lhs={bc.lhs:.17g} rhs={bc.rhs:.17g} ratio={bc.ratio:.17g} {verdict}")
    return EXIT_VIOLATION if bc.passed is False else EXIT_OK


def _cmd_decompose(args):
    from .function_spaces import (build_kernel_bank, besov_seminorm,
                                  holder_seminorm, lp_piece)

    f = harness.load_funcspec(args.funcspec)
    lo, hi = f.support
    if not np.isfinite(hi):
        hi = f.cutoff
    # pieces below a few lattice spacings pi/half_width are not resolved by the time grid
    n_floor = int(np.ceil(np.log2(8 * np.pi / f.half_width))) + 1
    n_min = int(np.floor(np.log2(lo))) - 1 if lo > 0 else max(args.n_min, n_floor)
    bank = build_kernel_bank(n_min, int(np.ceil(np.log2(hi))) + 1)
    print(f"function {f.name}: support [{lo:g}, {hi:g}], bank n in [{bank.n_min}, {bank.n_max}]")
    print(f"{'n':>4} {'||f_n||_inf':>14}")
    for n in bank.n_range:
        piece = lp_piece(f, n, bank)
        if not piece.is_zero:
            print(f"{n:>4} {piece.sup_norm():>14.6e}")
    print(f"{'s':>6} {'B^s_inf,1':>14} {'B^s_inf,inf':>14}")
    for s in args.orders:
        try:
            b1 = besov_seminorm(f, s, np.inf, 1, bank)
            binf = besov_seminorm(f, s, np.inf, np.inf, bank)
            print(f"{s:>6g} {b1:>14.6e} {binf:>14.6e}")
        except DissipertError as exc:
            print(f"{s:>6g} {'n/a':>14} {'n/a':>14}  ({exc})")
    print(f"{'alpha':>6} {'Lambda_alpha':>14}")
    for a in args.alphas:
        m = int(np.floor(a)) + 1
        print(f"{a:>6g} {holder_seminorm(f, a, m):>14.6e}")
    return EXIT_OK


def _cmd_funcalc(args):
    from .dissipative_core import read_matrix
    from .functional_calculus import compare_routes

    L = read_matrix(args.matrix)
    f = harness.load_funcspec(args.funcspec)
    results, dev = compare_routes(f, L)
    for name, res in results.items():
        print(f"route {name}: ||f(L)|| = {np.linalg.norm(res.value, 2):.12e}")
    for (a, b), d in dev.items():
        print(f"{a} vs {b}: relative deviation {d:.3e}")
    if args.print_matrix:
        from .dissipative_core import format_matrix
        first = next(iter(results.values()))
        sys.stdout.write(format_matrix(first.value))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="dissipert",
                                 description="Perturbation bounds for functions of dissipative matrices")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run a theorem suite"),
                           ("sweep", "fit scaling exponents only")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("-o", "--output", help="override output directory")
        p.add_argument("-v", "--verbose", action="store_true")
    p = sub.add_parser("replay", help="recompute a saved instance")
    p.add_argument("instance")
    p.add_argument("--tol-bound", type=float, default=None)
    p = sub.add_parser("decompose", help="Besov and Hoelder seminorm table")
    p.add_argument("funcspec")
    p.add_argument("--orders", type=float, nargs="+", default=[0.0, 1.0, 2.0])
    p.add_argument("--alphas", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--n-min", type=int, default=-12)
    p = sub.add_parser("funcalc", help="compare f(L) routes")
    p.add_argument("matrix")
    p.add_argument("funcspec")
    p.add_argument("--print-matrix", action="store_true")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_run(args, sweep_only=True)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "decompose":
            return _cmd_decompose(args)
        if args.command == "funcalc":
            return _cmd_funcalc(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ReplayCorrupt as exc:
        print(f"error: corrupt replay: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DissipertError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
