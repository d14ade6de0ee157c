"""Monotone envelope J1 and concave hull J of a sampled oracle curve."""
import argparse
import csv
from pathlib import Path

import numpy as np

from oracle_games import concavify, monotone_envelope
from oracle_games.io import read_curve

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", default=ROOT / "data/oracles/samples_nonmonotone.json")
    ap.add_argument("--out", default="normalize_curve.csv")
    args = ap.parse_args()
    _, pts = read_curve(args.samples)
    env = monotone_envelope(pts)
    hull = concavify(env)
    xs = np.union1d(np.linspace(0, pts[-1, 0], 301), pts[:, 0])
    raw = np.interp(xs, pts[:, 0], pts[:, 1])
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "I", "J1", "J"))
        for row in zip(xs, raw, env.eval(xs), hull.eval(xs)):
            w.writerow([f"{v:.12g}" for v in row])
    print("J1 breakpoints:", env.points)
    print("J breakpoints: ", hull.points)


if __name__ == "__main__":
    main()
