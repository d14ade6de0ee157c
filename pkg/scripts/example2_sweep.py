"""Equilibrium payment x_e and I(x_e) for Example 2 as k varies in I = sqrt(k x).

Writes the sweep CSV and the refined case boundaries.
"""
import argparse
import csv
from pathlib import Path

from oracle_games.io import read_game
from oracle_games.sweep import SweepConfig, locate_case_boundaries, rows_to_csv, sweep

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--game", default=ROOT / "data/games/example2.json")
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--out", default="example2_sweep.csv")
    ap.add_argument("--boundaries", default="example2_boundaries.csv")
    args = ap.parse_args()
    m = read_game(args.game)
    rows = sweep(m, SweepConfig("sqrt_k", 0.1, 5.0, args.steps, verify=True, jobs=args.jobs))
    Path(args.out).write_text(rows_to_csv(rows))
    with open(args.boundaries, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("k", "case_below", "case_above"))
        for k, a, b in locate_case_boundaries(m, rows):
            w.writerow((f"{k:.12g}", a, b))
            print(f"case {a} -> {b} at k = {k:.9f}")


if __name__ == "__main__":
    main()
