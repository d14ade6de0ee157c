"""A's equilibrium payoff E_a(k) in the opt-out game as information gets cheaper."""
import argparse
import csv
from pathlib import Path

import numpy as np

from oracle_games import harmful_info_profile
from oracle_games.io import read_game

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--game", default=ROOT / "data/games/harmful.json")
    ap.add_argument("--k-from", type=float, default=0.05)
    ap.add_argument("--k-to", type=float, default=5.0)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--out", default="harmful_information.csv")
    args = ap.parse_args()
    prof = harmful_info_profile(read_game(args.game), "sqrt_k",
                                np.linspace(args.k_from, args.k_to, args.steps))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("k", "case", "x_e", "I_xe", "E_a", "E_b", "opt_out_weight"))
        for k, eq in prof:
            w.writerow([f"{v:.12g}" for v in (k, eq.case_index, eq.x, eq.i_val, eq.e_a, eq.e_b,
                                               eq.s_b.probs[-1])])
    k_best, eq_best = max(prof, key=lambda t: t[1].e_a)
    print(f"E_a peaks at k = {k_best:.4f} with E_a = {eq_best.e_a:.4f} (no oracle: 2)")


if __name__ == "__main__":
    main()
