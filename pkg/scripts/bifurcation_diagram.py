#!/usr/bin/env python3
"""Invariant-interval endpoints of the tanh family along a noise-amplitude sweep.

The two minimal invariant intervals merge into one when the amplitude crosses
the tangency value; the scan makes that collision visible. Writes a CSV of
interval endpoints per amplitude and optionally a diagram.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

import ulamtail as ut


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--b", type=float, default=5.0)
    p.add_argument("--factor-min", type=float, default=0.05,
                   help="lowest amplitude as a fraction of the critical one")
    p.add_argument("--factor-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=80)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--plot", type=Path, default=None)
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    out = args.out or Path("results") / "bifurcation"
    out.mkdir(parents=True, exist_ok=True)

    sigma_star, x_tan = ut.bifurcation_parameter(args.b)
    print(f"b = {args.b:g}: critical amplitude {sigma_star:.12g}, tangency at {x_tan:.6f}")
    sigmas = np.linspace(args.factor_min, args.factor_max, args.points) * sigma_star
    rows = ut.bifurcation_scan("tanh_affine", args.b, sigmas)

    merges = [
        second.sigma for first, second in zip(rows, rows[1:])
        if second.n_intervals < first.n_intervals
    ]
    for s in merges:
        print(f"interval count drops at sigma = {s:.6f} "
              f"({s / sigma_star:.3f} of critical)")

    path = out / "bifurcation.csv"
    max_n = max(r.n_intervals for r in rows)
    header = ["sigma", "n_intervals"]
    for i in range(max_n):
        header += [f"lo{i + 1}", f"hi{i + 1}"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for r in rows:
            row = [r.sigma, r.n_intervals]
            for iv in r.intervals:
                row += [iv.lo, iv.hi]
            row += [""] * (2 * max_n - 2 * r.n_intervals)
            w.writerow(row)
    print(f"wrote {path}")

    if args.plot:
        plot(args.plot, rows, sigma_star)
    return 0


def plot(path, rows, sigma_star):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        import sys

        print("matplotlib not available; skipping plot", file=sys.stderr)
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for r in rows:
        for iv in r.intervals:
            ax.plot([r.sigma, r.sigma], [iv.lo, iv.hi], "b-", lw=1, alpha=0.7)
    ax.axvline(sigma_star, color="r", ls="--", lw=1, label="critical amplitude")
    ax.set_xlabel("sigma")
    ax.set_ylabel("invariant interval")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    print(f"wrote {path}")


if __name__ == "__main__":
    raise SystemExit(main())
