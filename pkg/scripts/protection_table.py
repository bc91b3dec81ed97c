"""Tabulate analyzer verdicts against integrated P0 for the three chains.

Usage: python3 scripts/protection_table.py [--rates 10 30 100] [--csv out.csv]
"""

import argparse
import csv
import sys

import numpy as np

from zenoguard.analyzer import dynamic_protection, find_dark_states
from zenoguard.models import MODEL_NAMES, ModelParams, build_model


def rows(rates, xi=1.0):
    for name in MODEL_NAMES:
        for damped in (False, True):
            for rate in rates:
                params = ModelParams(xi=xi, omega=rate, gamma=rate if damped else 0.0)
                scheme = build_model(name, params)
                report = find_dark_states(scheme)
                check = dynamic_protection(scheme)
                yield {
                    "model": name,
                    "omega": rate,
                    "gamma": params.gamma,
                    "n_dark": report.n_dark,
                    "protected": report.protected,
                    "min_P0": check.min_p0,
                    "mean_P0": check.mean_p0,
                }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rates", type=float, nargs="+", default=[10.0, 30.0, 100.0])
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args(argv)
    table = list(rows(args.rates))
    print(f"{'model':<18}{'omega':>8}{'gamma':>8}{'dark':>6}{'protected':>11}{'min P0':>12}{'mean P0':>10}")
    for r in table:
        print(
            f"{r['model']:<18}{r['omega']:>8g}{r['gamma']:>8g}{r['n_dark']:>6}{str(r['protected']):>11}"
            f"{r['min_P0']:>12.4g}{r['mean_P0']:>10.4f}"
        )
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(table[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
