"""Regenerate the benchtop identification on synthetic data and compare with
the reference bench numbers.

    python scripts/reproduce_benchtop.py [--noise 0.15] [--seed 2021]
"""
import argparse

import numpy as np

from exokit.actuator import FITTED_PARAMS, effective_torque_constant
from exokit.benchsim import SineBackdriveSpec, simulate_backdrive, simulate_grid, simulate_step
from exokit.sysid import fit_inertia, fit_torque_model

REFERENCE = {"k_tau": 0.147, "f_coulomb": 0.37, "f_gear": 0.088, "p95": 0.39,
             "inertia_kg_cm2": 92.11, "rmse_before": 0.28, "rmse_after": 0.061}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--noise", type=float, default=0.15, help="load-cell noise sigma, Nm")
    ap.add_argument("--seed", type=int, default=2021)
    args = ap.parse_args()

    run = simulate_grid(FITTED_PARAMS, noise_sigma=args.noise, seed=args.seed)
    rep = fit_torque_model(run.log)
    p = rep.params
    print(f"grid: {len(run.segments)} segments, {len(run.skipped)} skipped, {len(run.log)} samples")
    print(f"k_tau      {p.k_tau:.4f} Nm/A   (reference {REFERENCE['k_tau']})")
    print(f"k_tau@20A  {effective_torque_constant(p, 20):.4f} Nm/A   (reference 0.125)")
    print(f"f_coulomb  {p.f_coulomb:.3f} Nm     (reference {REFERENCE['f_coulomb']})")
    print(f"f_gear     {p.f_gear:.3f}        (reference {REFERENCE['f_gear']})")
    print(f"bias       {p.bias:+.4f} Nm")
    print(f"p95 |err|  {rep.residual_p95:.3f} Nm     (reference < {REFERENCE['p95']})")

    trials = [simulate_backdrive(SineBackdriveSpec(freq=f), FITTED_PARAMS, args.noise, seed=[args.seed, k])
              for k, f in enumerate((1.0, 2.0))]
    for f, tr in zip((1, 2), trials):
        print(f"backdrive {f} Hz peak |tau| {np.max(np.abs(tr.tau_meas)):.3f} Nm (reference < 2)")
    fit = fit_inertia(trials, p)
    print(f"inertia    {fit.inertia * 1e4:.2f} kg cm^2 (reference {REFERENCE['inertia_kg_cm2']})")
    print(f"rmse       {fit.rmse_before:.3f} -> {fit.rmse_after:.3f} Nm "
          f"(reference {REFERENCE['rmse_before']} -> {REFERENCE['rmse_after']})")

    step = simulate_step(FITTED_PARAMS, 30.0)
    print(f"30 Nm step settles at {step.tau_meas[-1]:.3f} Nm with {step.i_q[-1]:.2f} A")


if __name__ == "__main__":
    main()
