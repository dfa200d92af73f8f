"""Smallest beta on a grid where the three-walk small root is below 1/beta^3
and all six asymmetric equilibria are linearly stable.

    python scripts/probe_beta0.py --start 2.05 --stop 10 --step 0.05
"""
import argparse

import numpy as np

from reinforce_dyn.equilibria import build_S, probe_beta0, w_of_beta
from reinforce_dyn.flow import classify
from reinforce_dyn.model import three_walk_z


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--start", type=float, default=2.05)
    parser.add_argument("--stop", type=float, default=10.0)
    parser.add_argument("--step", type=float, default=0.05)
    args = parser.parse_args()

    grid = np.round(np.arange(args.start, args.stop + args.step / 2, args.step), 12)
    beta0 = probe_beta0(grid)
    print(f"probed beta0 = {beta0:g} on a grid of {len(grid)} values")
    w = w_of_beta(beta0)
    print(f"small root {w:.6g}, 1/beta^3 = {beta0 ** -3:.6g}")
    for x in build_S(beta0):
        report = classify(three_walk_z(beta0), x)
        print(np.round(x[:, 0], 6), report.classification.value, f"margin {report.hyperbolic_margin:.4f}")


if __name__ == "__main__":
    main()
