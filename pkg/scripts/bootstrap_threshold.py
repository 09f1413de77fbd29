"""Hedge-to-ponzi conversions from buyer exposure on heavy-tailed networks.

Reports conversions after one round (one year of exposure) and at the fixed
point, for each planted ponzi density.

    python3 scripts/bootstrap_threshold.py --n 2000 --threshold 0.15
"""

from __future__ import annotations

import argparse

from minsky.firm_model import MinskyStatus
from minsky.network import DegreeModel, bootstrap_cascade, generate_network, plant_statuses


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--pareto-exponent", type=float, default=1.3)
    parser.add_argument("--mean-degree", type=float, default=35.5)
    parser.add_argument("--threshold", type=float, default=0.15)
    parser.add_argument("--densities", type=float, nargs="+", default=[0.05, 0.10, 0.15, 0.20, 0.30])
    parser.add_argument("--seeds", type=int, default=3)
    args = parser.parse_args()

    for seed in range(1, args.seeds + 1):
        net = generate_network(args.n, DegreeModel(args.pareto_exponent, args.mean_degree), seed)
        for rho in args.densities:
            statuses = plant_statuses(net, rho, seed)
            seeded = sum(s is MinskyStatus.PONZI for s in statuses.values())
            one = len(bootstrap_cascade(net, statuses, args.threshold, max_rounds=1).failed) - seeded
            full = bootstrap_cascade(net, statuses, args.threshold)
            print(f"seed {seed} rho {rho:.2f}: one-round {one:5d}  fixed point {full.n_new:5d} "
                  f"in {len(full.rounds)} rounds")


if __name__ == "__main__":
    main()
