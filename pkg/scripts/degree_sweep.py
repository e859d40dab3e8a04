"""Scan fiber powers of a bundle bivector against the lift intertwiner.

For lam_k = t^k dt^dx on the (t, x) chart with the standard scaling of t,
the measured homogeneity degree is k - 1, and the raising map intertwines
the tangent and phase lifts exactly when that degree is -1.  The sweep
prints both certificates side by side over a window of k, so the single
passing row is visible at a glance.

Usage: python3 scripts/degree_sweep.py [--low K] [--high K] [--shift N]
"""

import argparse
import sys

from klab.symexpr import DEFAULT_CONFIG
from klab.tensorcalc import chart, homogeneity_degree, multivector, standard_action
from klab.lifts import intertwine_check


def sweep(low, high, shift, cfg):
    b = chart("B", "t x", avoid_zero="t")
    act = standard_action(b, b.sym("t"), b.table.parameter("s"))
    print(f"fiber power sweep on t^k dt^dx, shift {shift}")
    print(f"{'k':>3}  {'degree':>7}  {'homogeneous':>12}  intertwine")
    hits = []
    for k in range(low, high + 1):
        power = "t^%d" % k if k >= 0 else "1/t^%d" % (-k)
        lam = multivector(b, 2, {("t", "x"): power if k else "1"})
        hom = homogeneity_degree(lam, act, cfg)
        inter = intertwine_check(act, lam, shift, cfg)
        degree = "none" if hom.degree is None else str(hom.degree)
        print(f"{k:>3}  {degree:>7}  {hom.check.status:>12}  {inter.status}")
        if inter.passed:
            hits.append(k)
    return hits


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--low", type=int, default=-3)
    parser.add_argument("--high", type=int, default=3)
    parser.add_argument("--shift", type=int, default=0)
    args = parser.parse_args()
    hits = sweep(args.low, args.high, args.shift, DEFAULT_CONFIG)
    print(f"\nintertwine passes at k = {hits}"
          f" (degree {[k - 1 for k in hits]})")
    return 0 if hits == [0] or args.shift else 1


if __name__ == "__main__":
    sys.exit(main())
