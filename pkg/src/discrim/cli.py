"""Command-line front end.

Exit status: 0 success, 2 invalid input, 3 optimizer result not certified.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import analytic, b92, io, montecarlo, povm_opt, pvm_opt
from .core import InvalidInputError, evaluate

EXIT_OK, EXIT_INVALID, EXIT_UNCERTIFIED = 0, 2, 3


def _num(x) -> str:
    return f"{float(x):.6g}"


def _default_seed() -> int:
    raw = os.environ.get("DISCRIM_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InvalidInputError(f"DISCRIM_SEED={raw!r} is not an integer") from None


def _p_me(ensemble) -> float:
    if ensemble.n == 2:
        g = analytic.TwoStateGeometry.from_ensemble(ensemble)
        return float(analytic.helstrom_bound(g.eta1, g.eta2, g.overlap))
    return float(povm_opt.minimum_error(ensemble))


def cmd_bounds(args, out) -> int:
    e = io.load_ensemble(args.ensemble)
    p_me = _p_me(e)
    pvm_rate, idx, _ = analytic.ud_pvm_rate(e)
    if e.n == 2:
        g = analytic.TwoStateGeometry.from_ensemble(e)
        povm_rate = analytic.ud_povm_rate_two_state(g.eta1, g.eta2, g.overlap)
    else:
        povm_rate = povm_opt.optimize_povm(e, 0.0).rates.correct
    lines = analytic.reference_lines(p_me, 1.0 - pvm_rate, e.n)
    rows = [
        ("p_me", p_me),
        ("ud_pvm_rate", pvm_rate),
        ("ud_pvm_state", idx + 1),
        ("ud_povm_rate", povm_rate),
    ]
    for name in ("abstain", "guess"):
        (e0, i0), (e1, i1) = lines[name]
        rows += [(f"{name}_start_p_e", e0), (f"{name}_start_p_in", i0), (f"{name}_end_p_e", e1), (f"{name}_end_p_in", i1)]
    print("quantity,value", file=out)
    for k, v in rows:
        print(f"{k},{_num(v)}", file=out)
    return EXIT_OK


def cmd_curve(args, out) -> int:
    e = io.load_ensemble(args.ensemble)
    grid_spec = args.eps_grid or io.DEFAULT_GRID
    p_me = _p_me(e) if "P_ME" in grid_spec.upper() else None
    grid = io.parse_eps_grid(grid_spec, p_me)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.measurement == "pvm":
        curve = pvm_opt.pvm_tradeoff_curve(e, grid, restarts=args.restarts, seed=seed)
    else:
        curve = povm_opt.povm_tradeoff_curve(e, grid, method=args.method, restarts=args.restarts, seed=seed)
    io.write_curve_csv(curve, args.out)
    io.dump_strategies(e, [p.strategy for p in curve], io.strategies_path(args.out), curve.epsilons)
    print(f"wrote {len(curve)} points to {args.out}", file=out)
    if not curve.certified:
        print("warning: some points are not certified", file=sys.stderr)
        return EXIT_UNCERTIFIED
    return EXIT_OK


def cmd_eval(args, out) -> int:
    e, entries = io.load_strategies(args.strategy)
    print("index,epsilon,p_in,p_c,p_e", file=out)
    for k, (eps, s) in enumerate(entries):
        r = evaluate(e, s)
        eps_text = "" if eps is None else io.fmt(eps)
        print(f"{k},{eps_text},{io.fmt(r.inconclusive)},{io.fmt(r.correct)},{io.fmt(r.error)}", file=out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    e, entries = io.load_strategies(args.strategy)
    if args.index is not None:
        if not (0 <= args.index < len(entries)):
            raise InvalidInputError(f"--index {args.index} outside [0, {len(entries) - 1}]")
        entries = [entries[args.index]]
        indices = [args.index]
    else:
        indices = list(range(len(entries)))
    seed = args.seed if args.seed is not None else _default_seed()
    print("index,trials,seed,p_in,p_c,p_e,se_in,se_c,se_e", file=out)
    for k, (_, s) in zip(indices, entries):
        rep = montecarlo.simulate_strategy(e, s, args.trials, seed)
        r, se = rep.empirical, rep.standard_errors
        print(
            f"{k},{rep.trials},{rep.seed},{_num(r.inconclusive)},{_num(r.correct)},{_num(r.error)},"
            f"{_num(se['inconclusive'])},{_num(se['correct'])},{_num(se['error'])}",
            file=out,
        )
    return EXIT_OK


def cmd_b92(args, out) -> int:
    rows = io.read_curve_csv(args.curve)
    sweep = b92.b92_rate_vs_error(args.n, args.eb, args.ep, [(r["epsilon"], r["p_in"]) for r in rows])
    print("epsilon,rate", file=out)
    for eps, rate in sweep.table:
        print(f"{_num(eps)},{_num(rate)}", file=out)
    print(f"best,{_num(sweep.best_epsilon)},{_num(sweep.best_rate)}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="discrim", description="Bounded-error quantum state discrimination.")
    p.add_argument("-v", "--verbose", action="store_true", help="log optimizer diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="analytic bounds and reference lines")
    b.add_argument("ensemble")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("curve", help="optimal tradeoff curve as CSV")
    c.add_argument("ensemble")
    c.add_argument("--measurement", choices=("pvm", "povm"), required=True)
    c.add_argument("--eps-grid", default=None, help=f"lin:a:b:n, log:a:b:n or a comma list (default {io.DEFAULT_GRID})")
    c.add_argument("--out", required=True)
    c.add_argument("--restarts", type=int, default=32)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--method", choices=("sdp", "penalty"), default="sdp", help="POVM solver")
    c.set_defaults(func=cmd_curve)

    ev = sub.add_parser("eval", help="evaluate stored strategies")
    ev.add_argument("--strategy", required=True)
    ev.set_defaults(func=cmd_eval)

    s = sub.add_parser("simulate", help="Monte Carlo check of stored strategies")
    s.add_argument("--strategy", required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--index", type=int, default=None, help="simulate only this entry")
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("b92", help="B92 key rate along a curve CSV")
    k.add_argument("--curve", required=True)
    k.add_argument("--eb", type=float, required=True)
    k.add_argument("--ep", type=float, required=True)
    k.add_argument("--n", type=float, required=True)
    k.set_defaults(func=cmd_b92)
    return p


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(name)s: %(message)s")
    try:
        return args.func(args, out)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
