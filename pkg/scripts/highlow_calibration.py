#!/usr/bin/env python3
"""Calibrate the high-low constant at one scale and track it across finer ones.

For each generator kind the script fixes C0 as the worst fitted constant at
the calibration scale and prints the fitted constants at every finer scale;
the decomposition predicts they sit below C0 once the log factor is pulled
out.

Usage:
    python scripts/highlow_calibration.py [--calibrate 6] [--down-to 10]
"""

import argparse

from furstlab import config as cf
from furstlab import incidence as inc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--calibrate", type=int, default=6)
    ap.add_argument("--down-to", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--t", type=float, default=1.0)
    args = ap.parse_args()

    lam = 2.0
    for kind in ("affine", "parabola"):
        print(f"== {kind} ==")
        C0 = None
        for de in range(args.calibrate, args.down_to + 1):
            conf = cf.build_nice_configuration(
                kind, de, args.s, args.t, de, seed=args.seed, audit="probe"
            )
            P = conf.union_squares()
            fits = []
            for f in (1, 2, 4):
                rep = inc.high_low_report(conf.family, P, lam, 2 * lam * f)
                fits.append(rep.fitted_C)
            worst = max(fits)
            if C0 is None:
                C0 = worst
                tag = "(calibration)"
            else:
                tag = "OK" if worst <= C0 else "ABOVE C0"
            print(f"  delta=2^-{de}: fitted_C={worst:.5f}  C0={C0:.5f}  {tag}")


if __name__ == "__main__":
    main()
