"""Ensemble of three repelling walks on Z: drift patterns and limit points.

    python scripts/z_walk_ensemble.py --beta 10 --seeds 50 --steps 1000000
"""
import argparse
from collections import Counter

import numpy as np

from reinforce_dyn.equilibria import w_of_beta
from reinforce_dyn.errors import NoSmallRoot
from reinforce_dyn.sim import ensemble, run_z_walks


def pattern(drift, cut=0.5):
    return "".join("+" if v > cut else "-" if v < -cut else "0" for v in drift)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--beta", type=float, default=10.0)
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--steps", type=int, default=1_000_000)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    results = ensemble(lambda s: run_z_walks(args.beta, s, args.steps), range(args.seeds), args.workers)
    try:
        speed = 1 - 2 * w_of_beta(args.beta)
        print(f"predicted speed of the outer walks: {speed:.6f}")
    except NoSmallRoot:
        print("no asymmetric limit for this beta; all walks should be balanced")
    counts = Counter()
    for seed in sorted(results):
        res = results[seed]
        counts[pattern(res.drift)] += 1
        probs = " ".join(f"{p:.4f}" for p in res.empirical_step_probs)
        print(f"seed {seed:3d}  drift {np.round(res.drift, 4)}  right-move freq {probs}")
    print("drift patterns:", dict(sorted(counts.items())))


if __name__ == "__main__":
    main()
