"""``oracle-games`` command line: analyze | solve | sweep | normalize | simulate.

Exit codes: 0 success, 2 unreadable input, 3 solver error, 4 failed verification.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import OracleGameError, SpecFileError
from .game import maximal_matrix
from .io import (
    game_to_dict,
    oracle_to_dict,
    read_curve,
    read_game,
    read_oracle,
    write_game,
    write_oracle,
)
from .nodes import find_nodes, interval_profile
from .oracle import OracleFunction, concavify, monotone_envelope, normalize, shift_to_zero
from .solver import solve_oracle_game
from .sweep import SweepConfig, default_jobs, locate_case_boundaries, rows_to_csv, sweep
from .verify import deviation_check, simulate

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4


def _fmt(v) -> str:
    return "None" if v is None else f"{v:.12g}"


def _vec(v) -> str:
    return "(" + ", ".join(_fmt(float(p)) for p in np.asarray(v)) + ")"


def _dump(obj, path):
    text = json.dumps(obj, indent=2, default=_jsonable) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _jsonable(o):
    if isinstance(o, np.ndarray) or hasattr(o, "probs"):
        return np.asarray(o).tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


# -- analyze ------------------------------------------------------------
def cmd_analyze(args) -> int:
    m = read_game(args.game)
    f = read_oracle(args.oracle) if args.oracle else None
    r = maximal_matrix(m)
    nodes = find_nodes(m, r, f)
    intervals = interval_profile(m, r, nodes)
    print("maximal matrix R (A, B):")
    for row in r.to_pairs():
        print("  " + "  ".join(f"({_fmt(a)}, {_fmt(b)})" for a, b in row))
    print(f"nodes: {len(nodes)}")
    for e in nodes:
        print(f"  I={_fmt(e.i_star)} x={_fmt(e.x_star)} B{e.strategy + 1} {e.direction}")
    print("intervals:")
    for ia in intervals:
        print(f"  I in ({_fmt(ia.i_lo)}, {_fmt(ia.i_hi)}): s_b={_vec(ia.s_b)} V={_fmt(ia.v)}")
        if ia.a_unique:
            for line in ia.formula(list(m.row_labels) if m.row_labels else None):
                print(f"    {line}")
        else:
            print("    s_a not unique on this interval")
    if args.json:
        _dump({
            "R": r.to_pairs(),
            "nodes": [{"I": e.i_star, "x": e.x_star, "strategy": e.strategy,
                       "direction": e.direction, "witness": e.witness} for e in nodes],
            "intervals": [{"I_lo": ia.i_lo, "I_hi": ia.i_hi, "s_b": ia.s_b, "V": ia.v,
                           "b_support": list(ia.b_support),
                           "a_support": None if ia.a_support is None else list(ia.a_support),
                           "s_a_coeffs": None if ia.s_a_coeffs is None
                           else [list(c) for c in ia.s_a_coeffs]} for ia in intervals],
        }, args.json)
    return EXIT_OK


# -- solve --------------------------------------------------------------
def _sim_ok(sim, eq, f, n_se=4.0) -> bool:
    p = float(f.eval(eq.x))
    rate_se = math.sqrt(max(p * (1 - p), 0.0) / sim.trials)
    return (abs(sim.mean_e_a - eq.e_a) <= n_se * sim.std_err_a + 1e-12
            and abs(sim.mean_e_b - eq.e_b) <= n_se * sim.std_err_b + 1e-12
            and abs(sim.response_rate - p) <= 5 * rate_se + 1e-12)


def cmd_solve(args) -> int:
    m = read_game(args.game)
    f = read_oracle(args.oracle)
    eq = solve_oracle_game(m, f)
    print(f"case: {eq.case_index} ({eq.case_label})")
    print(f"x = {_fmt(eq.x)}   I(x) = {_fmt(eq.i_val)}")
    print(f"s_a = {_vec(eq.s_a)}")
    print(f"s_b = {_vec(eq.s_b)}")
    print(f"E_a = {_fmt(eq.e_a)}   E_b = {_fmt(eq.e_b)}   V = {_fmt(eq.v_at_eq)}")
    lo, hi = eq.x_multiplicity
    if hi > lo:
        print(f"every x in [{_fmt(lo)}, {_fmt(hi)}] gives an equilibrium")
    report = {"equilibrium": eq.as_dict()}
    status = EXIT_OK
    if args.verify:
        cert = deviation_check(m, maximal_matrix(m), f, eq)
        sim = simulate(m, f, eq.s_a, eq.s_b, eq.x, args.trials, args.seed)
        ok = cert.passed and _sim_ok(sim, eq, f)
        print(f"deviation check: {'passed' if cert.passed else 'FAILED'} "
              f"(gains A strategy {cert.max_gain_a_strategy:.3g}, "
              f"A payment {cert.max_gain_a_payment:.3g}, B {cert.max_gain_b:.3g}; "
              f"worst: {cert.worst_deviation})")
        print(f"simulation ({sim.trials} trials, seed {sim.seed}): "
              f"E_a {sim.mean_e_a:.6f} +- {sim.std_err_a:.2g}, "
              f"E_b {sim.mean_e_b:.6f} +- {sim.std_err_b:.2g}, "
              f"response rate {sim.response_rate:.6f}")
        report["certificate"] = cert.as_dict()
        report["simulation"] = sim.as_dict()
        if not ok:
            status = EXIT_VERIFY
    if args.json:
        _dump(report, args.json)
    return status


# -- sweep --------------------------------------------------------------
def cmd_sweep(args) -> int:
    m = read_game(args.game)
    cfg = SweepConfig(args.family, args.k_from, args.k_to, args.steps, args.x_cap,
                      args.verify, args.jobs)
    rows = sweep(m, cfg)
    text = rows_to_csv(rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    bad = [r for r in rows if r.error]
    if args.boundaries:
        with open(args.boundaries, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("k", "case_below", "case_above"))
            for k, a, b in locate_case_boundaries(m, rows, args.family, args.x_cap):
                w.writerow((f"{k:.12g}", a, b))
    for r in bad:
        print(f"k={r.k:.12g}: {r.error}", file=sys.stderr)
    if any(r.error.startswith("verification failed") for r in bad):
        return EXIT_VERIFY
    return EXIT_OK


# -- normalize ----------------------------------------------------------
def cmd_normalize(args) -> int:
    f, samples = read_curve(args.input)
    if samples is not None:
        env = monotone_envelope(samples)
        hull = concavify(env)
        xs, raw = samples[:, 0], samples[:, 1]
    else:
        if f.is_normalized() and args.x_cap is None:
            env = hull = f
        else:
            rep = normalize(f, args.x_cap)
            env, hull = rep.envelope, rep.concave
        end = f.x_end()
        # curves that never saturate (constant_c) are tabulated on [0, 1]
        cap = args.x_cap or (end if math.isfinite(end) and end > 0 else 1.0)
        xs = np.linspace(0.0, cap, 1025)
        if f.kind == "piecewise_linear":
            xs = np.union1d(xs, [p[0] for p in f.points if p[0] <= cap])
        raw = f.eval(xs)
    out_f: OracleFunction = hull
    c = float(hull.eval(0.0))
    if c > 0.0:
        if not args.game:
            print(f"normalized curve starts at I(0)={_fmt(c)}; pass --game to fold it "
                  "into the game", file=sys.stderr)
        else:
            n_game, out_f = shift_to_zero(read_game(args.game), hull)
            dest = args.game_out or "-"
            if dest == "-":
                _dump(game_to_dict(n_game), "-")
            else:
                write_game(n_game, dest)
    if args.out == "-":
        _dump(oracle_to_dict(out_f), "-")
    else:
        write_oracle(out_f, args.out)
    if args.plot_data:
        with open(args.plot_data, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("x", "I", "J1", "J"))
            for x, a, b, c_ in zip(xs, raw, env.eval(xs), out_f.eval(xs)):
                w.writerow(tuple(f"{v:.12g}" for v in (x, a, b, c_)))
    return EXIT_OK


# -- simulate -----------------------------------------------------------
def _parse_probs(text: str):
    return [float(t) for t in text.split(",")]


def cmd_simulate(args) -> int:
    m = read_game(args.game)
    f = read_oracle(args.oracle)
    if args.s_a and args.s_b and args.x is not None:
        s_a, s_b, x = _parse_probs(args.s_a), _parse_probs(args.s_b), args.x
        expected = None
    else:
        eq = solve_oracle_game(m, f)
        s_a, s_b, x = eq.s_a, eq.s_b, eq.x
        expected = eq
    sim = simulate(m, f, s_a, s_b, x, args.trials, args.seed, jobs=args.jobs or default_jobs())
    print(f"trials {sim.trials}  seed {sim.seed}")
    print(f"E_a = {sim.mean_e_a:.9f} +- {sim.std_err_a:.3g}")
    print(f"E_b = {sim.mean_e_b:.9f} +- {sim.std_err_b:.3g}")
    print(f"response rate = {sim.response_rate:.9f} (I(x) = {_fmt(float(f.eval(x)))})")
    if args.json:
        _dump(sim.as_dict(), args.json)
    if expected is not None and not _sim_ok(sim, expected, f):
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oracle-games",
                                description="Equilibria of bimatrix games with a paid oracle.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="nodes and per-interval structure of a game")
    a.add_argument("game")
    a.add_argument("oracle", nargs="?")
    a.add_argument("--json", metavar="PATH", help="also write a JSON report ('-' for stdout)")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("solve", help="equilibrium (s_a, s_b, x) for a game and oracle")
    s.add_argument("game")
    s.add_argument("oracle")
    s.add_argument("--verify", action="store_true", help="deviation check plus Monte-Carlo")
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", metavar="PATH")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="solve along a one-parameter oracle family")
    w.add_argument("game")
    w.add_argument("--family", default="sqrt_k", choices=("sqrt_k", "linear_slope", "sqrt_shift"))
    w.add_argument("--k-from", type=float, default=0.1)
    w.add_argument("--k-to", type=float, default=5.0)
    w.add_argument("--steps", type=int, default=500)
    w.add_argument("--x-cap", type=float, default=None)
    w.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    w.add_argument("--boundaries", metavar="PATH", help="write refined case boundaries")
    w.add_argument("--verify", action="store_true")
    w.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: $ORACLE_GAMES_JOBS or 1)")
    w.set_defaults(func=cmd_sweep)

    n = sub.add_parser("normalize", help="monotone envelope and concave hull of a curve")
    n.add_argument("input", help="oracle file or samples file")
    n.add_argument("--out", default="-", help="normalized oracle file")
    n.add_argument("--plot-data", metavar="PATH", help="CSV with columns x, I, J1, J")
    n.add_argument("--game", help="game file, used when the curve starts above zero")
    n.add_argument("--game-out", help="where to write the shifted game ('-' for stdout)")
    n.add_argument("--x-cap", type=float, default=None)
    n.set_defaults(func=cmd_normalize)

    m = sub.add_parser("simulate", help="Monte-Carlo play of the oracle protocol")
    m.add_argument("game")
    m.add_argument("oracle")
    m.add_argument("--s-a", help="comma-separated probabilities (default: solved equilibrium)")
    m.add_argument("--s-b")
    m.add_argument("--x", type=float)
    m.add_argument("--trials", type=int, default=1_000_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--jobs", type=int, default=None)
    m.add_argument("--json", metavar="PATH")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (OracleGameError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
