"""Mean dark period of the damped three-level chain versus drive strength.

Runs quantum-jump ensembles at Gamma = Omega, fits the log-log slope of the
mean dark period against Omega and reports the prefactor relative to
Omega^2 / (Gamma xi^2).

Usage: python3 scripts/dark_period_scaling.py [--omegas 8 16 32] [--ntraj 2000] [--seed 7]
"""

import argparse
import sys

import numpy as np

from zenoguard.models import ModelParams, build_model
from zenoguard.oracles import dark_period_mean
from zenoguard.trajectories import dark_period_stats, run_ensemble


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omegas", type=float, nargs="+", default=[8.0, 16.0, 32.0])
    ap.add_argument("--ntraj", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threshold", type=float, default=2.0, help="dark threshold in units of 1/xi")
    ap.add_argument("--periods", type=float, default=10.0, help="t_max in units of the expected dark time")
    args = ap.parse_args(argv)

    xi = 1.0
    means = []
    print(f"{'omega':>8}{'mean dark':>12}{'samples':>9}{'expected':>10}{'ratio':>8}")
    for om in args.omegas:
        scheme = build_model("three_level_chain", ModelParams(xi=xi, omega=om, gamma=om))
        expected = dark_period_mean(xi, om, om)
        t_max = args.periods * expected
        ens = run_ensemble(scheme, np.array([1, 0, 0], dtype=complex), t_max, args.ntraj, args.seed)
        st = dark_period_stats(ens, args.threshold / xi, t_max)
        means.append(st.mean_dark_period)
        print(f"{om:>8g}{st.mean_dark_period:>12.4g}{st.n_samples:>9}{expected:>10.4g}{st.mean_dark_period / expected:>8.3f}")
    if len(means) > 1:
        slope = np.polyfit(np.log(args.omegas), np.log(means), 1)[0]
        print(f"log-log slope: {slope:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
