"""Distance of the final occupation to the nearest stable equilibrium,
for an ensemble of two repelling walks on two vertices.

    python scripts/k2_convergence.py --beta 4 --seeds 50 --steps 200000
"""
import argparse

import numpy as np

from reinforce_dyn.equilibria import find_all
from reinforce_dyn.model import two_walk_k2
from reinforce_dyn.sim import ensemble, run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--beta", type=float, default=4.0)
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--steps", type=int, default=200_000)
    args = parser.parse_args()

    model = two_walk_k2(args.beta)
    stable = [e.point for e in find_all(model, 100, 0) if e.stable]
    finals = ensemble(lambda s: run(model, s, args.steps, args.steps).final.occupation, range(args.seeds))
    hits = np.zeros(len(stable), dtype=int)
    dists = []
    for seed in sorted(finals):
        d = [np.max(np.abs(finals[seed] - p)) for p in stable]
        hits[int(np.argmin(d))] += 1
        dists.append(min(d))
    for p, h in zip(stable, hits):
        print(f"limit {np.round(p.ravel(), 6)}: {h} runs")
    print(f"distance to nearest stable point: median {np.median(dists):.4f}, max {np.max(dists):.4f}")


if __name__ == "__main__":
    main()
