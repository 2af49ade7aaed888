"""Assist-ratio sweep of the squat task for each exoskeleton layout.

Prints the mean per-rep reduction of the human knee and hip torque integrals
(N m s, one leg) and the exo peaks.

    python scripts/squat_sweep.py [--alphas 0 0.1 0.2 0.3]
"""
import argparse

import numpy as np

from exokit.control import ExoConfig, Layout
from exokit.squat import SquatSpec, simulate_squat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.3])
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    spec = SquatSpec(reps=args.reps)
    print(f"{'layout':<9}{'alpha':>6}{'knee red':>10}{'hip red':>9}{'knee pk':>9}{'hip pk':>8}")
    for layout in Layout:
        for a in args.alphas:
            res = simulate_squat(spec, ExoConfig(layout=layout, alpha=a))
            kr = np.mean([r.knee_integral_reduction for r in res.reps])
            hr = np.mean([r.hip_integral_reduction for r in res.reps])
            print(f"{layout.value:<9}{a:>6.2f}{kr:>10.2f}{hr:>9.2f}"
                  f"{res.exo_knee.max():>9.2f}{res.exo_hip.max():>8.2f}")


if __name__ == "__main__":
    main()
