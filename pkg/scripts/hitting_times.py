#!/usr/bin/env python3
"""Deterministic hitting times toward an attracting or tangent boundary.

For a linear contraction the number of extremal-map steps needed to pass a
point at distance |x| grows like ln|x| / ln(multiplier); for a tangent drift
x + alpha |x|^r it grows like |x|^(1-r) / (alpha (r-1)). Prints measured
counts next to the limits.
"""
import argparse
import math

import ulamtail as ut


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--depth", type=float, default=1e-6,
                   help="target distance for the contracting cases")
    p.add_argument("--depth-tangent", type=float, default=1e-3)
    args = p.parse_args(argv)

    print("contracting boundary, n / ln|x| vs 1 / ln(lam)")
    for lam in (0.3, 0.5, 0.7, 0.9):
        m = ut.affine(lam, 1.0)
        n = ut.hitting_time(m, x0=-1.0, x=-args.depth, x_plus=1.0 / (1.0 - lam))
        est = n / math.log(args.depth)
        ref = 1.0 / math.log(lam)
        print(f"  lam={lam:.1f}  n={n:6d}  measured {est:8.4f}  limit {ref:8.4f}  "
              f"off {abs(est - ref) / abs(ref):6.2%}")

    print("tangent boundary, |x|^(r-1) n vs 1 / (alpha (r-1))")
    for alpha, r, x0 in ((1.0, 2, -0.4), (2.0, 3, -0.3)):
        m = ut.power_nonhyp(alpha, r, 0.05)
        n = ut.hitting_time(m, x0=x0, x=-args.depth_tangent)
        est = args.depth_tangent ** (r - 1) * n
        ref = 1.0 / (alpha * (r - 1))
        print(f"  alpha={alpha:.0f} r={r}  n={n:7d}  measured {est:8.4f}  "
              f"limit {ref:8.4f}  off {abs(est - ref) / ref:6.2%}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
