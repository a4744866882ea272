"""Circle model with azimuth projection vs sphere model on random 3D settings.

    python3 scripts/noncoplanar.py --pairs 10
"""

import argparse

import numpy as np

from lhvlab.geometry import Direction3, relative_angle
from lhvlab.harness import ExperimentSpec, run_experiment
from lhvlab.stats import estimate_correlation


def random_direction(rng: np.random.Generator) -> Direction3:
    v = rng.normal(size=3)
    return Direction3(*(v / np.linalg.norm(v)))


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--pairs", type=int, default=10)
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    pairs = [(random_direction(rng), random_direction(rng)) for _ in range(args.pairs)]
    results = {
        m: run_experiment(ExperimentSpec(m, pairs, args.trials, args.seed), workers=4).records
        for m in ("circle-3d", "sphere")
    }
    print(f"{'angle':>7} {'-cos':>8} {'circle-3d':>10} {'sphere':>8}")
    for i, (a, b) in enumerate(pairs):
        theta = relative_angle(a, b)
        circ = estimate_correlation(results["circle-3d"][i]).e_hat
        sph = estimate_correlation(results["sphere"][i]).e_hat
        print(f"{theta:7.4f} {-np.cos(theta):8.4f} {circ:10.4f} {sph:8.4f}")


if __name__ == "__main__":
    main()
