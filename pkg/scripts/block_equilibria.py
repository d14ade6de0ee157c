"""The 4x4 game with two decoupled 2x2 blocks: each block solved on its own."""
import argparse
from pathlib import Path

import numpy as np

from oracle_games import solve_cross_section, solve_multi
from oracle_games.io import read_game, read_oracle

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--game", default=ROOT / "data/games/multiple.json")
    ap.add_argument("--oracle", default=ROOT / "data/oracles/sqrt_x.json")
    args = ap.parse_args()
    m, f = read_game(args.game), read_oracle(args.oracle)
    print("base-game equilibria:")
    for s_a, s_b in solve_cross_section(m):
        print(f"  s_a={np.round(s_a.probs, 6)} s_b={np.round(s_b.probs, 6)}")
    for block, eq in zip(("A1,A2 x B1,B2", "A3,A4 x B3,B4"),
                         solve_multi(m, f, [((0, 1), (0, 1)), ((2, 3), (2, 3))])):
        print(f"{block}: {eq.case_label} x={eq.x:.6g} s_a={np.round(eq.s_a.probs, 6)} "
              f"s_b={np.round(eq.s_b.probs, 6)} E_a={eq.e_a:.6g}")


if __name__ == "__main__":
    main()
