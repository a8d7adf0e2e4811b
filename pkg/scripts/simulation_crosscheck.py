#!/usr/bin/env python3
"""Monte Carlo histogram against the transfer-operator density.

Two independent routes to the same stationary law: a long simulated orbit
binned on the grid, and the stationary vector of the discretized transfer
operator. Prints the L1 distance and writes both tables.
"""
import argparse
import csv
import time
from pathlib import Path

import ulamtail as ut


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n-samples", type=int, default=1_000_000)
    p.add_argument("--n-cells", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    out = args.out or Path("results") / "crosscheck"
    out.mkdir(parents=True, exist_ok=True)

    m = ut.affine(args.lam, args.sigma)
    noise = ut.uniform_noise()
    interval = ut.minimal_invariant_intervals(m)[0]
    grid = ut.build_grid(interval.bounds, args.n_cells)

    t0 = time.perf_counter()
    density = ut.stationary(ut.assemble(m, noise, grid))
    t_ulam = time.perf_counter() - t0

    plan = ut.SimulationPlan(x0=0.0, n_samples=args.n_samples, seed=args.seed,
                             burn_in=1000)
    t0 = time.perf_counter()
    measure = ut.simulate(m, noise, plan, grid=grid)
    t_mc = time.perf_counter() - t0

    l1 = ut.l1_distance(measure, density)
    print(f"interval [{interval.lo:.6f}, {interval.hi:.6f}], N = {grid.n_cells}")
    print(f"transfer operator {t_ulam:.1f}s, simulation {t_mc:.1f}s "
          f"({args.n_samples:,} samples)")
    print(f"L1 distance {l1:.4f}")

    with open(out / "density.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x_lo", "x_hi", "phi"])
        w.writerows(zip(grid.edges[:-1], grid.edges[1:], density.phi))
    freq = measure.counts / (measure.total * grid.widths)
    with open(out / "histogram.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x_lo", "x_hi", "count", "density"])
        w.writerows(zip(grid.edges[:-1], grid.edges[1:], measure.counts, freq))
    print(f"wrote {out}/density.csv and {out}/histogram.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
