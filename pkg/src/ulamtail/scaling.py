"""Hitting-time and tail-exponent estimators near the upper boundary point.

Working coordinates put the boundary fixed point at 0 and measure everything
by the distance d = x_+ - x. The estimated limits are

    hyperbolic      ln phi(x) / ln^2 d      ->  (k+1) / (2 ln lam)   (< 0)
    nonhyperbolic   d^(r-1) ln phi(x)/ln d  ->  r (k+1) / (alpha (r-1))
    hitting, hyp    n / ln d                ->  1 / ln lam
    hitting, non    d^(r-1) n               ->  1 / (alpha (r-1))

with the same density limits holding for the upper-tail mass T(x). Raw values
converge logarithmically, so estimates extrapolate a linear fit in 1/ln(1/d).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from . import map_model as mm
from .boundary import BoundaryClassification
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    IterationCapError,
    WindowError,
)
from .montecarlo import EmpiricalMeasure, empirical_tail
from .ulam import StationaryDensity

__all__ = [
    "FitDetails",
    "ScalingReport",
    "tail_constant",
    "default_window",
    "hitting_time",
    "hitting_scaling",
    "density_tail_exponent",
    "measure_tail_exponent",
    "loglog_fit",
]

Mode = Literal[
    "hyperbolic_density",
    "nonhyperbolic_density",
    "hyperbolic_tail",
    "nonhyperbolic_tail",
    "hitting_hyperbolic",
    "hitting_nonhyperbolic",
]

WINDOW_HYPERBOLIC = (1e-4, 1e-1)
WINDOW_NONHYPERBOLIC = (3e-3, 3e-1)
WINDOW_POINTS = 20
MIN_WINDOW_POINTS = 5
ITERATION_CAP = 10**9


@dataclass(frozen=True)
class FitDetails:
    slope: float
    intercept: float
    residual: float  # max abs deviation of the data from the fitted line


@dataclass
class ScalingReport:
    mode: Mode
    window: np.ndarray  # distances d, strictly decreasing toward 0
    raw_values: np.ndarray
    estimate: float
    theory: float
    rel_error: float
    fit_details: FitDetails | None
    converged: bool  # raw values monotone over the final half of the window


def tail_constant(classification: BoundaryClassification, k: int = 0) -> float:
    """Theoretical limit of the density/tail statistic for noise flatness k."""
    if classification.kind == "hyperbolic":
        return (k + 1) / (2.0 * np.log(classification.lam))
    return classification.r * (k + 1) / (classification.alpha * (classification.r - 1))


def default_window(classification: BoundaryClassification) -> np.ndarray:
    lo, hi = (
        WINDOW_HYPERBOLIC if classification.kind == "hyperbolic" else WINDOW_NONHYPERBOLIC
    )
    return np.geomspace(hi, lo, WINDOW_POINTS)


def _clean_window(window) -> np.ndarray:
    d = np.unique(np.asarray(window, dtype=float))[::-1]
    if len(d) == 0 or d[-1] <= 0:
        raise ConfigError("window distances must be positive")
    if d[0] >= 1.0:
        d = d[d < 1.0]
        if len(d) == 0:
            raise ConfigError("window distances must be < 1")
    return d


def _tail_monotone(values: np.ndarray) -> bool:
    half = values[len(values) // 2 :]
    if len(half) < 2:
        return True
    diffs = np.diff(half)
    return bool(np.all(diffs >= 0) or np.all(diffs <= 0))


def _extrapolate(d: np.ndarray, raw: np.ndarray) -> tuple[float, FitDetails]:
    """Intercept of the linear fit of raw values against 1/ln(1/d)."""
    s = 1.0 / np.log(1.0 / d)
    slope, intercept = np.polyfit(s, raw, 1)
    resid = float(np.max(np.abs(slope * s + intercept - raw)))
    return float(intercept), FitDetails(float(slope), float(intercept), resid)


def _report(mode: Mode, d, raw, estimate, theory, fit) -> ScalingReport:
    rel = abs(estimate - theory) / abs(theory) if theory != 0 else np.inf
    return ScalingReport(mode, d, raw, estimate, theory, rel, fit, _tail_monotone(raw))


# --- hitting times ----------------------------------------------------------

def _resolve_h_plus(m, x_plus: float) -> Callable[[float], float]:
    if isinstance(m, mm.RandomMapSpec):
        return lambda u: float(mm.extremal(m, "+", u + x_plus)) - x_plus
    if callable(m):
        return m
    raise ConfigError("expected a RandomMapSpec or a callable h_+")


def hitting_time(m, x0: float, x: float, x_plus: float = 0.0, cap: int = ITERATION_CAP) -> int:
    """Minimal n with h_+^n(x0) in (x, 0], boundary-relative coordinates.

    Accepts a map spec (shifted by x_plus so the boundary sits at 0) or a bare
    callable already in boundary-relative coordinates.
    """
    if not x < 0:
        raise DomainError(f"target x must be < 0, got {x}")
    if not x0 <= x:
        if x < x0 <= 0:
            return 0
        raise DomainError(f"need x0 <= x < 0, got x0={x0}, x={x}")
    f = _resolve_h_plus(m, x_plus)
    u = float(x0)
    n = 0
    while not (x < u <= 0.0):
        nxt = float(f(u))
        if nxt > 0.0:
            raise DivergenceError(f"orbit jumped past the target interval at step {n}")
        if nxt <= u:
            raise DivergenceError(f"orbit stopped increasing at step {n} (u={u})")
        u = nxt
        n += 1
        if n > cap:
            raise IterationCapError(f"no entry into ({x}, 0] within {cap} steps")
    return n


def hitting_scaling(
    m,
    classification: BoundaryClassification,
    x0: float,
    window=None,
    x_plus: float = 0.0,
    cap: int = ITERATION_CAP,
) -> ScalingReport:
    """Hitting-time statistics along one shared orbit over a window of distances."""
    d = _clean_window(window if window is not None else default_window(classification))
    targets = -d  # ascending: farthest target first
    if not x0 < targets[0]:
        raise DomainError(f"x0={x0} must lie below the largest target {targets[0]}")
    f = _resolve_h_plus(m, x_plus)
    ns = np.empty(len(d), dtype=np.int64)
    u = float(x0)
    n = 0
    i = 0
    while i < len(d):
        while i < len(d) and targets[i] < u <= 0.0:
            ns[i] = n
            i += 1
        if i >= len(d):
            break
        nxt = float(f(u))
        if nxt > 0.0:
            raise DivergenceError(f"orbit jumped past the target interval at step {n}")
        if nxt <= u:
            raise DivergenceError(f"orbit stopped increasing at step {n} (u={u})")
        u = nxt
        n += 1
        if n > cap:
            raise IterationCapError(f"hitting sweep exceeded {cap} steps")
    if classification.kind == "hyperbolic":
        raw = ns / np.log(d)
        theory = 1.0 / np.log(classification.lam)
        mode: Mode = "hitting_hyperbolic"
    else:
        raw = d ** (classification.r - 1) * ns
        theory = 1.0 / (classification.alpha * (classification.r - 1))
        mode = "hitting_nonhyperbolic"
    return _report(mode, d, raw, float(raw[-1]), theory, None)


# --- tail exponents ---------------------------------------------------------

def _collect_density_points(density, x_plus: float, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d, value) pairs, snapped to cell midpoints for gridded densities."""
    if isinstance(density, StationaryDensity):
        edges = density.grid.edges
        xs = x_plus - d
        lo, hi = density.grid.span
        keep = (xs >= lo) & (xs <= hi)
        j = np.clip(np.searchsorted(edges, xs[keep], side="right") - 1, 0, density.grid.n_cells - 1)
        j = np.unique(j)
        mids = density.grid.midpoints[j]
        dd = x_plus - mids
        vals = density.phi[j]
        order = np.argsort(dd)[::-1]
        dd, vals = dd[order], vals[order]
    elif callable(density):
        dd = d
        vals = np.asarray([float(density(x_plus - di)) for di in d])
    else:
        raise ConfigError("expected a StationaryDensity or a callable")
    ok = (dd > 0) & (dd < 1.0) & np.isfinite(vals) & (vals > 0)
    if np.any(vals[(dd > 0) & (dd < 1.0)] <= 0):
        warnings.warn("dropping window points with zero (underflowed) values")
    return dd[ok], vals[ok]


def _collect_tail_points(tail, x_plus: float, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d, value) pairs of the upper-tail mass, snapped to edges where exact."""
    if isinstance(tail, StationaryDensity):
        edges = tail.grid.edges
        suffix = np.concatenate((np.cumsum((tail.phi * tail.grid.widths)[::-1])[::-1], [0.0]))
        xs = x_plus - d
        lo, hi = tail.grid.span
        keep = (xs >= lo) & (xs <= hi)
        j = np.unique(np.clip(np.searchsorted(edges, xs[keep]), 0, len(edges) - 1))
        dd = x_plus - edges[j]
        vals = suffix[j]
    elif isinstance(tail, EmpiricalMeasure):
        edges = tail.grid.edges
        xs = x_plus - d
        lo, hi = tail.grid.span
        keep = (xs >= lo) & (xs <= hi)
        j = np.unique(np.clip(np.searchsorted(edges, xs[keep]), 0, len(edges) - 1))
        dd = x_plus - edges[j]
        vals = np.asarray([empirical_tail(tail, float(e)) for e in edges[j]])
    elif callable(tail):
        dd = d
        vals = np.asarray([float(tail(x_plus - di)) for di in d])
    else:
        raise ConfigError("expected a StationaryDensity, EmpiricalMeasure, or callable")
    order = np.argsort(dd)[::-1]
    dd, vals = dd[order], vals[order]
    ok = (dd > 0) & (dd < 1.0) & np.isfinite(vals) & (vals > 0)
    if np.any(vals[(dd > 0) & (dd < 1.0)] <= 0):
        warnings.warn("dropping window points with zero (underflowed) tail mass")
    return dd[ok], vals[ok]


def _require_points(d: np.ndarray):
    if len(d) < MIN_WINDOW_POINTS:
        raise WindowError(
            f"only {len(d)} usable window points (need {MIN_WINDOW_POINTS})"
        )


def _raw_statistic(classification: BoundaryClassification, d, vals) -> np.ndarray:
    logs = np.log(vals)
    if classification.kind == "hyperbolic":
        return logs / np.log(d) ** 2
    return d ** (classification.r - 1) * logs / np.log(d)


def density_tail_exponent(
    density,
    x_plus: float,
    classification: BoundaryClassification,
    window=None,
    k: int = 0,
) -> ScalingReport:
    """Boundary scaling exponent of a stationary density (gridded or callable)."""
    d0 = _clean_window(window if window is not None else default_window(classification))
    d, vals = _collect_density_points(density, x_plus, d0)
    _require_points(d)
    raw = _raw_statistic(classification, d, vals)
    estimate, fit = _extrapolate(d, raw)
    theory = tail_constant(classification, k)
    mode: Mode = (
        "hyperbolic_density" if classification.kind == "hyperbolic" else "nonhyperbolic_density"
    )
    return _report(mode, d, raw, estimate, theory, fit)


def measure_tail_exponent(
    tail,
    x_plus: float,
    classification: BoundaryClassification,
    window=None,
    k: int = 0,
) -> ScalingReport:
    """Same limit as density_tail_exponent, computed from the upper-tail mass."""
    d0 = _clean_window(window if window is not None else default_window(classification))
    d, vals = _collect_tail_points(tail, x_plus, d0)
    _require_points(d)
    raw = _raw_statistic(classification, d, vals)
    estimate, fit = _extrapolate(d, raw)
    theory = tail_constant(classification, k)
    mode: Mode = (
        "hyperbolic_tail" if classification.kind == "hyperbolic" else "nonhyperbolic_tail"
    )
    return _report(mode, d, raw, estimate, theory, fit)


def loglog_fit(
    density,
    x_plus: float,
    classification: BoundaryClassification,
    window=None,
) -> FitDetails:
    """Doubly logarithmic fit of the density against distance to the boundary.

    Hyperbolic: least squares of ln ln(1/phi) on ln ln(1/d); the model slope is 2
    and the intercept estimates ln |c1|. Nonhyperbolic: with u = ln(1/d), fits
    the intercept of ln ln(1/phi) - (r-1) u - ln u, estimating ln c2; the
    returned slope is the fixed (r-1).
    """
    d0 = _clean_window(window if window is not None else default_window(classification))
    d, vals = _collect_density_points(density, x_plus, d0)
    ok = vals < 1.0
    if not np.all(ok):
        warnings.warn("dropping window points with density >= 1 (outside the tail regime)")
    d, vals = d[ok], vals[ok]
    _require_points(d)
    u = np.log(1.0 / d)
    y = np.log(np.log(1.0 / vals))
    if classification.kind == "hyperbolic":
        slope, intercept = np.polyfit(np.log(u), y, 1)
        resid = float(np.max(np.abs(slope * np.log(u) + intercept - y)))
        return FitDetails(float(slope), float(intercept), resid)
    r = classification.r
    centered = y - (r - 1) * u - np.log(u)
    intercept = float(np.mean(centered))
    resid = float(np.max(np.abs(centered - intercept)))
    return FitDetails(float(r - 1), intercept, resid)
