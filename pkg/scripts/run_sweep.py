"""Correlation curve for each model on the default 25-point grid.

    python3 scripts/run_sweep.py --trials 200000
"""

import argparse

from lhvlab.harness import DEFAULT_GRID, sweep
from lhvlab.stats import linear_corr, quantum_corr


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--workers", type=int, default=4)
    args = p.parse_args()

    kinds = ("linear", "erased-circle", "sphere")
    curves = {k: sweep(k, DEFAULT_GRID, args.trials, args.seed, workers=args.workers) for k in kinds}
    print(f"{'theta':>7} {'-cos':>8} {'linear':>8} " + " ".join(f"{k:>14}" for k in kinds))
    for i, theta in enumerate(DEFAULT_GRID):
        row = " ".join(f"{curves[k][i][1].e_hat:14.4f}" for k in kinds)
        print(f"{theta:7.4f} {quantum_corr(theta):8.4f} {linear_corr(theta):8.4f} {row}")


if __name__ == "__main__":
    main()
