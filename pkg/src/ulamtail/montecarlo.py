"""Direct simulation of the random map for cross-validating Ulam densities.

Chains use counter-based streams keyed by (seed, chain index), all noise for a
chain is drawn in one call, and histograms merge in fixed chain order, so a
plan's output is bit-identical no matter how the work is scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import map_model as mm
from . import noise as noise_mod
from .errors import ConfigError, EscapeError, GridMismatchError
from .ulam import Grid, StationaryDensity

__all__ = [
    "SimulationPlan",
    "EmpiricalMeasure",
    "simulate",
    "empirical_tail",
    "l1_distance",
]


@dataclass(frozen=True)
class SimulationPlan:
    x0: float
    n_samples: int
    seed: int
    burn_in: int = 1000
    n_chains: int = 1

    def __post_init__(self):
        if self.burn_in < 0:
            raise ConfigError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.n_chains < 1:
            raise ConfigError(f"n_chains must be >= 1, got {self.n_chains}")


@dataclass
class EmpiricalMeasure:
    grid: Grid
    counts: np.ndarray  # int64 per cell
    total: int
    min_seen: float
    max_seen: float


def _chain_noise(noise: noise_mod.NoiseModel, seed: int, chain: int, n: int) -> np.ndarray:
    key = np.array([np.uint64(seed), np.uint64(chain)], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return noise_mod.sample(noise, gen, n)


def simulate(
    m: mm.RandomMapSpec,
    noise: noise_mod.NoiseModel,
    plan: SimulationPlan,
    grid: Grid,
) -> EmpiricalMeasure:
    """Histogram of plan.n_chains * plan.n_samples post-burn-in iterates."""
    steps = plan.burn_in + plan.n_samples
    omegas = np.empty((plan.n_chains, steps))
    for c in range(plan.n_chains):
        omegas[c] = _chain_noise(noise, plan.seed, c, steps)

    lo, hi = m.domain
    x = np.full(plan.n_chains, float(plan.x0))
    if not lo <= plan.x0 <= hi:
        raise EscapeError(f"x0={plan.x0} outside domain [{lo}, {hi}]")
    traj = np.empty((plan.n_chains, steps))
    additive = mm._is_additive(m)
    for t in range(steps):
        if additive:
            x = mm._drift(m, x) + m.sigma * omegas[:, t] + mm._noise_offset(m)
        else:
            x = np.array([float(m.h(xc, wc)) for xc, wc in zip(x, omegas[:, t])])
        traj[:, t] = x
    if np.any(traj < lo) or np.any(traj > hi) or not np.all(np.isfinite(traj)):
        raise EscapeError("an orbit left the map domain")

    samples = traj[:, plan.burn_in :]
    glo, ghi = grid.span
    if samples.min() < glo or samples.max() > ghi:
        raise GridMismatchError(
            f"samples span [{samples.min()}, {samples.max()}] outside grid [{glo}, {ghi}]"
        )
    counts = np.zeros(grid.n_cells, dtype=np.int64)
    for c in range(plan.n_chains):  # fixed merge order
        counts += np.histogram(samples[c], bins=grid.edges)[0].astype(np.int64)
    total = plan.n_chains * plan.n_samples
    return EmpiricalMeasure(grid, counts, total, float(samples.min()), float(samples.max()))


def empirical_tail(measure: EmpiricalMeasure, x: float) -> float:
    """Fraction of samples >= x; bin straddling x counts in full."""
    if x > measure.max_seen:
        return 0.0
    if x <= measure.min_seen:
        return 1.0
    j = int(np.searchsorted(measure.grid.edges, x, side="right")) - 1
    j = min(max(j, 0), measure.grid.n_cells - 1)
    return float(measure.counts[j:].sum()) / measure.total


def _density_cumulative_mass(density: StationaryDensity, xs: np.ndarray) -> np.ndarray:
    """Exact integral of the piecewise-constant density from its left edge to xs."""
    edges = density.grid.edges
    xs = np.clip(xs, edges[0], edges[-1])
    cell_mass = density.phi * density.grid.widths
    cum = np.concatenate(([0.0], np.cumsum(cell_mass)))
    j = np.clip(np.searchsorted(edges, xs, side="right") - 1, 0, density.grid.n_cells - 1)
    return cum[j] + density.phi[j] * (xs - edges[j])


def l1_distance(measure: EmpiricalMeasure, density: StationaryDensity) -> float:
    """L1 distance between bin masses; density is rebinned exactly onto the histogram."""
    (mlo, mhi), (dlo, dhi) = measure.grid.span, density.grid.span
    scale = max(1.0, abs(mlo), abs(mhi))
    if abs(mlo - dlo) > 1e-9 * scale or abs(mhi - dhi) > 1e-9 * scale:
        raise GridMismatchError(f"grid spans differ: {(mlo, mhi)} vs {(dlo, dhi)}")
    cm = _density_cumulative_mass(density, measure.grid.edges)
    target = np.diff(cm)
    hist = measure.counts / measure.total
    return float(np.abs(hist - target).sum())
