"""Equilibrium count, stable count and the small root across a beta grid.

    python scripts/phase_scan.py --walks 2 --start 0 --stop 4 --step 0.25 --out k2_scan.csv
"""
import argparse
import math
from pathlib import Path

import numpy as np

from reinforce_dyn.cli import write_csv
from reinforce_dyn.equilibria import find_all, w_of_beta
from reinforce_dyn.errors import NoSmallRoot
from reinforce_dyn.model import repelling


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--walks", type=int, default=2)
    parser.add_argument("--vertices", type=int, default=2)
    parser.add_argument("--start", type=float, default=0.0)
    parser.add_argument("--stop", type=float, default=4.0)
    parser.add_argument("--step", type=float, default=0.25)
    parser.add_argument("--starts", type=int, default=100, help="multi-start count per beta")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=Path("phase_scan.csv"))
    args = parser.parse_args()

    grid = np.round(np.arange(args.start, args.stop + args.step / 2, args.step), 12)
    rows = []
    for beta in grid:
        eqs = find_all(repelling(args.walks, args.vertices, beta), args.starts, args.seed)
        try:
            w = w_of_beta(beta)
        except NoSmallRoot:
            w = math.nan
        n_stable = sum(e.stable for e in eqs)
        rows.append([beta, len(eqs), n_stable, w])
        print(f"beta={beta:6.3f}  equilibria={len(eqs):3d}  stable={n_stable:3d}  small root={w:.6g}")
    write_csv(args.out, ["beta", "n_equilibria", "n_stable", "small_root"], rows)


if __name__ == "__main__":
    main()
