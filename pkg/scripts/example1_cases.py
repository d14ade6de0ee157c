"""Example 1 under three oracle curves: curve samples plus the equilibrium point.

Writes ``example1_cases.csv`` (x, I for each curve) and prints one line per
equilibrium.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from oracle_games import solve_oracle_game, sqrt_k, sqrt_shift
from oracle_games.io import read_game

ROOT = Path(__file__).resolve().parent.parent
CURVES = {"sqrt(x+1)-1": sqrt_shift(1), "sqrt(x)": sqrt_k(1), "2sqrt(x)": sqrt_k(4)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--game", default=ROOT / "data/games/example1.json")
    ap.add_argument("--out", default="example1_cases.csv")
    args = ap.parse_args()
    m = read_game(args.game)
    xs = np.linspace(0, 0.5, 201)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + list(CURVES))
        for i, x in enumerate(xs):
            w.writerow([f"{x:.12g}"] + [f"{float(f.eval(x)):.12g}" for f in CURVES.values()])
    for name, f in CURVES.items():
        eq = solve_oracle_game(m, f)
        print(f"{name:>12}: case {eq.case_index} ({eq.case_label}) x={eq.x:.6g} I={eq.i_val:.6g} "
              f"s_a={np.round(eq.s_a.probs, 6)} s_b={np.round(eq.s_b.probs, 6)} E_a={eq.e_a:.6g}")


if __name__ == "__main__":
    main()
