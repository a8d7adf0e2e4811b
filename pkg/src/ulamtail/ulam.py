"""Piecewise-constant discretization of the transfer operator on graded grids.

The chain's one-step kernel is integrated exactly in the noise variable: for a
source point x the mass sent into a target cell [e_j, e_j+1] is the noise mass
of [h_x^-1(e_j), h_x^-1(e_j+1)] clipped to [-1, 1]. Averaging over a few
Gauss-Legendre source points per cell removes the midpoint bias that plain
Ulam discretizations put on the tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp

from . import map_model as mm
from . import noise as noise_mod
from .boundary import MinimalInvariantInterval
from .errors import ConfigError, DomainError, NoConvergenceError, NumericalError

__all__ = [
    "Grid",
    "TransitionMatrix",
    "StationaryDensity",
    "build_grid",
    "assemble",
    "stationary",
    "apply_transfer",
    "density_at",
    "n_step_density",
]

MIN_CELL_WIDTH = 1e-14
FLUSH_FLOOR = 1e-300
LOG_STEP_TOL = 1e-6


@dataclass
class Grid:
    """Ascending cell edges; geometric grading shrinks widths toward the anchor."""

    edges: np.ndarray
    grading: Literal["uniform", "geometric"]
    ratio: float | None = None
    anchor: float | None = None

    @property
    def n_cells(self) -> int:
        return len(self.edges) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def span(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])


@dataclass
class TransitionMatrix:
    """Row-stochastic sparse discretization of the transfer kernel."""

    P: sp.csr_matrix
    grid: Grid
    m_q: int
    row_defect: float  # max |row mass - 1| before renormalization, covering rows only


@dataclass
class StationaryDensity:
    """Piecewise-constant density phi (mass per unit length) over a grid."""

    grid: Grid
    phi: np.ndarray
    support: MinimalInvariantInterval
    residual: float

    @property
    def mass(self) -> float:
        return float(np.sum(self.phi * self.grid.widths))


def build_grid(
    interval: tuple[float, float],
    n_cells: int,
    grading: Literal["uniform", "geometric"] = "uniform",
    ratio: float = 0.995,
    anchor: float | None = None,
) -> Grid:
    """Grid over the interval; geometric grading needs an endpoint anchor.

    Widths below the representable floor are clamped and the length defect is
    absorbed by the largest cell, so total length is exact.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and hi - lo > 0):
        raise ConfigError(f"degenerate interval {interval!r}")
    if n_cells < 16:
        raise ConfigError(f"need at least 16 cells, got {n_cells}")
    if grading == "uniform":
        return Grid(np.linspace(lo, hi, n_cells + 1), "uniform")
    if grading != "geometric":
        raise ConfigError(f"unknown grading {grading!r}")
    if not 0 < ratio < 1:
        raise ConfigError(f"geometric ratio must be in (0, 1), got {ratio}")
    if anchor is None:
        raise ConfigError("geometric grading needs an anchor")
    scale = max(1.0, abs(lo), abs(hi))
    at_hi = abs(anchor - hi) <= 1e-9 * scale
    at_lo = abs(anchor - lo) <= 1e-9 * scale
    if not (at_hi or at_lo):
        raise ConfigError(f"anchor {anchor} must be an endpoint of {interval!r}")
    length = hi - lo
    w0 = length * (1.0 - ratio) / (1.0 - ratio**n_cells)
    widths = w0 * ratio ** np.arange(n_cells)  # largest first, shrinking toward anchor
    clamped = np.maximum(widths, MIN_CELL_WIDTH)
    defect = clamped.sum() - length
    if defect >= clamped[0] - MIN_CELL_WIDTH:
        raise ConfigError("width floor incompatible with interval length")
    clamped[0] -= defect
    if at_lo:
        clamped = clamped[::-1]
    edges = np.empty(n_cells + 1)
    edges[0] = lo
    np.cumsum(clamped, out=edges[1:])
    edges[1:] += lo
    edges[-1] = hi
    return Grid(edges, "geometric", ratio=ratio, anchor=float(anchor))


# --- assembly ---------------------------------------------------------------

def _source_nodes(grid: Grid, m_q: int) -> np.ndarray:
    nodes = np.polynomial.legendre.leggauss(m_q)[0]
    return grid.midpoints[:, None] + 0.5 * grid.widths[:, None] * nodes[None, :]


def assemble(
    m: mm.RandomMapSpec,
    noise: noise_mod.NoiseModel,
    grid: Grid,
    m_q: int = 4,
) -> TransitionMatrix:
    """Row-stochastic matrix of cell-to-cell transition masses.

    Each row averages the exact noise masses over m_q Gauss-Legendre source
    points in the cell. Rows are renormalized; a row whose image misses the
    grid entirely gets a self-loop.
    """
    lo, hi = grid.span
    dlo, dhi = m.domain
    slack = 1e-9 * max(1.0, abs(dlo), abs(dhi))
    if lo < dlo - slack or hi > dhi + slack:
        raise DomainError(f"grid span {(lo, hi)} outside map domain {m.domain}")
    if m_q < 1:
        raise ConfigError(f"m_q must be >= 1, got {m_q}")
    n = grid.n_cells
    edges = grid.edges
    xq = _source_nodes(grid, m_q)
    additive = mm._is_additive(m)

    indptr = np.zeros(n + 1, dtype=np.int64)
    index_chunks: list[np.ndarray] = []
    data_chunks: list[np.ndarray] = []
    covered = np.ones(n, dtype=bool)  # row image inside grid span
    row_defect = 0.0

    for i in range(n):
        j_lo = n
        j_hi = 0
        pieces = []
        for q in range(m_q):
            x = float(xq[i, q])
            if additive:
                fx = float(mm._drift(m, x)) + mm._noise_offset(m)
                y_lo, y_hi = fx - m.sigma, fx + m.sigma
            else:
                y_lo = float(m.h(x, -1.0))
                y_hi = float(m.h(x, 1.0))
            if y_lo < lo - slack or y_hi > hi + slack:
                covered[i] = False
            a = max(int(np.searchsorted(edges, y_lo, side="right")) - 1, 0)
            b = min(int(np.searchsorted(edges, y_hi, side="left")), n)
            if b <= a:
                pieces.append(None)
                continue
            sub = edges[a : b + 1]
            if additive:
                w = (sub - fx) / m.sigma
            else:
                w = np.asarray(mm.section_inverse_clipped(m, x, sub), dtype=float)
            masses = noise_mod.consecutive_masses(noise, w)
            pieces.append((a, masses))
            j_lo = min(j_lo, a)
            j_hi = max(j_hi, b)
        if j_hi <= j_lo:
            # image entirely off-grid: absorb in place
            index_chunks.append(np.array([i], dtype=np.int32))
            data_chunks.append(np.array([1.0]))
            indptr[i + 1] = indptr[i] + 1
            covered[i] = False
            continue
        acc = np.zeros(j_hi - j_lo)
        for piece in pieces:
            if piece is None:
                continue
            a, masses = piece
            acc[a - j_lo : a - j_lo + len(masses)] += masses
        acc /= m_q
        total = acc.sum()
        if covered[i]:
            row_defect = max(row_defect, abs(total - 1.0))
        if total <= 0:
            index_chunks.append(np.array([i], dtype=np.int32))
            data_chunks.append(np.array([1.0]))
            indptr[i + 1] = indptr[i] + 1
            continue
        acc /= total
        index_chunks.append(np.arange(j_lo, j_hi, dtype=np.int32))
        data_chunks.append(acc)
        indptr[i + 1] = indptr[i] + len(acc)

    if np.any(covered) and row_defect > 1e-6:
        raise NumericalError(f"assembly row-mass defect {row_defect:.3e} exceeds 1e-6")
    P = sp.csr_matrix(
        (np.concatenate(data_chunks), np.concatenate(index_chunks), indptr),
        shape=(n, n),
    )
    return TransitionMatrix(P, grid, m_q, row_defect)


# --- stationary vector ------------------------------------------------------

def _restrict_indices(grid: Grid, restrict_to) -> tuple[np.ndarray, MinimalInvariantInterval]:
    if restrict_to is None:
        lo, hi = grid.span
        support = MinimalInvariantInterval(lo, hi, False)
    elif isinstance(restrict_to, MinimalInvariantInterval):
        support = restrict_to
    else:
        support = MinimalInvariantInterval(float(restrict_to[0]), float(restrict_to[1]), False)
    mids = grid.midpoints
    idx = np.nonzero((mids >= support.lo) & (mids <= support.hi))[0]
    if len(idx) == 0:
        raise ConfigError(f"no grid cells inside {support.lo, support.hi}")
    return idx, support


def stationary(
    matrix: TransitionMatrix,
    tol: float = 1e-13,
    max_iter: int = 10**6,
    restrict_to=None,
) -> StationaryDensity:
    """Left fixed vector of the transition matrix by normalized power iteration.

    Starts from the uniform density on the restriction. Stopping needs two
    conditions at once: the L1 step difference below tol, and every surviving
    entry stable in log scale. The second condition matters on graded grids:
    entries many orders below the bulk contribute nothing to the L1 step, yet
    the startup transient in them drains by whole factors per sweep. An L1-only
    stop would freeze that transient into the reported far tail. Entries below
    1e-300 are flushed to exact zero so the drain terminates crisply instead of
    wandering through denormals. Raises NoConvergenceError (best iterate
    attached) when the budget runs out.
    """
    grid = matrix.grid
    idx, support = _restrict_indices(grid, restrict_to)
    full = len(idx) == grid.n_cells
    P = matrix.P if full else matrix.P[idx][:, idx].tocsr()
    sums = np.asarray(P.sum(axis=1)).ravel()
    live = sums > 0
    if not full and np.any(live):
        inv = np.where(live, 1.0 / np.where(live, sums, 1.0), 0.0)
        P = sp.diags(inv) @ P
    PT = P.T.tocsr()

    widths = grid.widths[idx]
    pi = widths / widths.sum()
    converged = False
    for _ in range(max_iter):
        nxt = PT @ pi
        nxt[nxt < FLUSH_FLOOR] = 0.0
        s = nxt.sum()
        if s <= 0:
            raise NumericalError("stationary iteration lost all mass")
        nxt /= s
        step = float(np.abs(nxt - pi).sum())
        if step < tol:
            old_pos = pi > 0
            new_pos = nxt > 0
            if not np.any(old_pos != new_pos):
                both = old_pos & new_pos
                if not np.any(both):
                    converged = True
                else:
                    log_step = float(np.abs(np.log(nxt[both] / pi[both])).max())
                    converged = log_step <= LOG_STEP_TOL
        pi = nxt
        if converged:
            break
    residual = float(np.abs(PT @ pi - pi).sum())
    phi = np.zeros(grid.n_cells)
    phi[idx] = pi / widths
    out = StationaryDensity(grid, phi, support, residual)
    if not converged:
        raise NoConvergenceError(
            f"power iteration did not reach tol={tol} in {max_iter} steps", best=out
        )
    return out


def apply_transfer(
    density: StationaryDensity,
    m: mm.RandomMapSpec,
    noise: noise_mod.NoiseModel,
    m_q: int = 4,
) -> StationaryDensity:
    """Quadrature evaluation of the transfer operator at cell midpoints.

    Independent of the matrix route; the recorded residual is the L1 distance
    between input and (unnormalized) output, for cross-checking stationarity.
    """
    grid = density.grid
    mids = grid.midpoints
    weights = density.phi * grid.widths / m_q
    y = _source_nodes(grid, m_q)
    out = np.zeros(grid.n_cells)
    for q in range(m_q):
        kq = mm.transition_density(m, noise, y[:, q][:, None], mids[None, :])
        out += weights @ kq
    residual = float(np.sum(np.abs(out - density.phi) * grid.widths))
    total = float(np.sum(out * grid.widths))
    if total <= 0:
        raise NumericalError("transfer image has no mass on the grid")
    return StationaryDensity(grid, out / total, density.support, residual)


def density_at(density: StationaryDensity, x: float) -> float:
    """Piecewise-constant lookup; zero outside the support cells."""
    lo, hi = density.grid.span
    if not lo - 1e-12 * max(1.0, abs(lo)) <= x <= hi + 1e-12 * max(1.0, abs(hi)):
        raise DomainError(f"x={x} outside grid span [{lo}, {hi}]")
    j = int(np.searchsorted(density.grid.edges, x, side="right")) - 1
    j = min(max(j, 0), density.grid.n_cells - 1)
    return float(density.phi[j])


def n_step_density(matrix: TransitionMatrix, n: int, i: int, max_iter: int = 10**6) -> np.ndarray:
    """Row i of the n-step transition matrix, renormalized to unit mass."""
    if n < 1:
        raise ConfigError(f"need n >= 1, got {n}")
    if n > max_iter:
        raise OverflowError(f"n={n} exceeds the iteration budget {max_iter}")
    if not 0 <= i < matrix.grid.n_cells:
        raise DomainError(f"cell index {i} out of range")
    PT = matrix.P.T.tocsr()
    row = np.zeros(matrix.grid.n_cells)
    row[i] = 1.0
    for _ in range(n):
        row = PT @ row
    s = row.sum()
    if s <= 0:
        raise NumericalError("n-step row lost all mass")
    return row / s
