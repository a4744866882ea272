"""Residual of the Franson model vs the dwell time of a square phase schedule.

Small dwell times (comparable to the arm delay) break the -cos(alpha+beta)
dependence; long dwell times preserve it.

    python3 scripts/franson_switching.py --dwell 0.75 1 2 5 20 100
"""

import argparse
import math

from lhvlab.franson import PhaseSchedule, bin_by_detection_phase
from lhvlab.harness import ExperimentSpec, run_experiment


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dwell", type=float, nargs="+", default=[0.75, 1.0, 2.0, 5.0, 20.0, 100.0])
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args()

    print(f"{'dwell':>8} {'level':>5} {'e_hat':>8} {'target':>8} {'residual':>9} {'z':>8}")
    for dwell in args.dwell:
        sched = PhaseSchedule(0.0, math.pi / 3, "square", dwell, math.pi / 2)
        rec = run_experiment(ExperimentSpec("franson", [sched], args.trials, args.seed), workers=4).records[0]
        for lvl, b in enumerate(bin_by_detection_phase(rec, sched)):
            z = b.residual / b.estimate.se if b.estimate.se else float("inf")
            print(f"{dwell:8.2f} {lvl:5d} {b.estimate.e_hat:8.4f} {b.target:8.4f} {b.residual:9.4f} {z:8.1f}")


if __name__ == "__main__":
    main()
