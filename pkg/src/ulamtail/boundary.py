"""Extremal-map analysis: fixed points, minimal invariant intervals, boundary type.

For monotone increasing extremal maps h_- <= h_+, any pair (fixed point of h_-,
fixed point of h_+) bounds an exactly invariant interval; the minimal ones pair
mutually nearest attracting endpoints. The upper endpoint's multiplier decides
between the hyperbolic (lambda < 1) and nonhyperbolic (lambda = 1, order r >= 2)
boundary regimes used by the scaling estimators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import minimize_scalar

from . import map_model as mm
from .errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    NoFixedPointError,
    NotFixedPointError,
)

__all__ = [
    "FixedPoint",
    "MinimalInvariantInterval",
    "BoundaryClassification",
    "ScanRow",
    "find_fixed_points",
    "minimal_invariant_intervals",
    "classify_boundary",
    "bifurcation_parameter",
    "bifurcation_scan",
]

TOL_NEUTRAL = 1e-6
TOL_TANGENCY = 1e-10
TOL_DERIV = 1e-7
_N_SCAN = 2000


@dataclass(frozen=True)
class FixedPoint:
    x_star: float
    which: Literal["upper", "lower"]
    multiplier: float
    stability: Literal["attracting", "repelling", "neutral"]


@dataclass(frozen=True)
class MinimalInvariantInterval:
    lo: float
    hi: float
    verified: bool

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class BoundaryClassification:
    """Local model of h_+ at the upper endpoint x_+.

    kind "hyperbolic": h_+(x) ~ x_+ + lam*(x - x_+) with lam in (0, 1).
    kind "nonhyperbolic": h_+(x) ~ x + alpha*(x_+ - x)^r.
    gamma is d/domega h at (x_+, 1), reported for diagnostics only.
    """

    kind: Literal["hyperbolic", "nonhyperbolic"]
    lam: float
    r: int | None
    alpha: float | None
    gamma: float


@dataclass(frozen=True)
class ScanRow:
    sigma: float
    n_intervals: int
    intervals: tuple[MinimalInvariantInterval, ...]


def _sign_of(which: str) -> str:
    if which == "upper":
        return "+"
    if which == "lower":
        return "-"
    raise ConfigError(f"which must be 'upper' or 'lower', got {which!r}")


def _g(m: mm.RandomMapSpec, sign: str, x):
    return mm.extremal(m, sign, x) - np.asarray(x, dtype=float)


def _bisect_root(f, a: float, b: float, tol: float = 1e-13) -> float:
    fa = f(a)
    for _ in range(200):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fa * fm <= 0:
            b = mid
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def _multiplier(m: mm.RandomMapSpec, sign: str, x: float) -> float:
    return mm.extremal_derivative(m, sign, x, 1)


def _stability(mult: float, tol_neutral: float) -> str:
    if abs(mult - 1.0) < tol_neutral:
        return "neutral"
    return "attracting" if mult < 1.0 else "repelling"


def find_fixed_points(
    m: mm.RandomMapSpec,
    noise=None,
    which: Literal["upper", "lower"] = "upper",
    search_interval: tuple[float, float] | None = None,
    n_scan: int = _N_SCAN,
    tol_neutral: float = TOL_NEUTRAL,
) -> list[FixedPoint]:
    """All fixed points of the extremal map on the search interval, ascending.

    Simple roots come from a sign-change scan refined by bisection; tangencies
    (double roots, no sign change) from minimizing |g| with g = h_pm - id.
    The noise argument is accepted for interface symmetry and unused.
    """
    sign = _sign_of(which)
    lo, hi = search_interval if search_interval is not None else m.domain
    if not (m.domain[0] - 1e-12 <= lo < hi <= m.domain[1] + 1e-12):
        raise DomainError(f"search interval {(lo, hi)} outside domain {m.domain}")
    xs = np.linspace(lo, hi, n_scan)
    gs = np.asarray(_g(m, sign, xs), dtype=float)
    scale = max(1.0, abs(lo), abs(hi))

    roots: list[float] = []
    crossing = np.nonzero(np.sign(gs[:-1]) * np.sign(gs[1:]) < 0)[0]
    for i in crossing:
        roots.append(_bisect_root(lambda x: float(_g(m, sign, x)), xs[i], xs[i + 1]))
    for i in np.nonzero(gs == 0.0)[0]:
        roots.append(float(xs[i]))

    # tangency sweep: local minima of |g| that bisection cannot see
    absg = np.abs(gs)
    interior = np.nonzero((absg[1:-1] < absg[:-2]) & (absg[1:-1] <= absg[2:]))[0] + 1
    for i in interior:
        if any(xs[i - 1] <= r <= xs[i + 1] for r in roots):
            continue
        res = minimize_scalar(
            lambda x: abs(float(_g(m, sign, x))),
            bounds=(float(xs[i - 1]), float(xs[i + 1])),
            method="bounded",
            options={"xatol": 1e-14},
        )
        if abs(res.fun) < TOL_TANGENCY:
            roots.append(float(res.x))

    out: list[FixedPoint] = []
    for x_star in sorted(roots):
        if any(abs(x_star - p.x_star) <= 1e-8 * scale for p in out):
            continue
        resid = abs(float(_g(m, sign, x_star)))
        if resid > 1e-11 * max(1.0, abs(x_star)):
            continue
        mult = _multiplier(m, sign, x_star)
        out.append(FixedPoint(x_star, which, mult, _stability(mult, tol_neutral)))
    if not out:
        raise NoFixedPointError(f"no {which} fixed point in [{lo}, {hi}]")
    return out


def _attracts_toward(m: mm.RandomMapSpec, fp: FixedPoint) -> bool:
    """Whether the endpoint attracts from inside a candidate interval."""
    if fp.stability == "attracting":
        return True
    if fp.stability == "repelling":
        return False
    scale = max(1.0, abs(fp.x_star))
    delta = 1e-5 * scale
    if fp.which == "upper":
        # neutral upper end must pull points up from below
        probe = fp.x_star - delta
        if probe < m.domain[0]:
            return False
        return float(_g(m, "+", probe)) > 0
    probe = fp.x_star + delta
    if probe > m.domain[1]:
        return False
    return float(_g(m, "-", probe)) < 0


def minimal_invariant_intervals(m: mm.RandomMapSpec, noise=None) -> list[MinimalInvariantInterval]:
    """Minimal invariant intervals [fp of h_-, fp of h_+], mutually nearest pairs.

    Empty list when either extremal map has no suitable fixed point.
    """
    try:
        uppers = [p for p in find_fixed_points(m, which="upper") if _attracts_toward(m, p)]
        lowers = [p for p in find_fixed_points(m, which="lower") if _attracts_toward(m, p)]
    except NoFixedPointError:
        return []
    if not uppers or not lowers:
        return []
    ups = sorted(p.x_star for p in uppers)
    los = sorted(p.x_star for p in lowers)
    out: list[MinimalInvariantInterval] = []
    for u in ups:
        below = [v for v in los if v < u]
        if not below:
            continue
        l = max(below)
        if min(v for v in ups if v > l) != u:
            continue
        out.append(MinimalInvariantInterval(l, u, _verify_invariant(m, l, u)))
    return out


def _verify_invariant(m: mm.RandomMapSpec, lo: float, hi: float, n: int = 1000) -> bool:
    xs = np.linspace(lo, hi, n)
    slack = 1e-10 * max(1.0, abs(lo), abs(hi))
    top = np.max(mm.extremal(m, "+", xs))
    bot = np.min(mm.extremal(m, "-", xs))
    return bool(top <= hi + slack and bot >= lo - slack)


def classify_boundary(
    m: mm.RandomMapSpec,
    x_plus: float,
    tol_neutral: float = TOL_NEUTRAL,
    tol_deriv: float = TOL_DERIV,
) -> BoundaryClassification:
    """Classify the upper boundary fixed point as hyperbolic or nonhyperbolic."""
    resid = abs(float(_g(m, "+", x_plus)))
    if resid > 1e-8 * max(1.0, abs(x_plus)):
        raise NotFixedPointError(f"h_+({x_plus}) - x residual {resid:.3e} too large")
    lam = _multiplier(m, "+", x_plus)
    gamma = mm._domega_unchecked(m, x_plus, 1.0)
    if lam <= 1.0 - tol_neutral:
        return BoundaryClassification("hyperbolic", lam, None, None, gamma)
    for r in range(2, 7):
        d = mm.extremal_derivative(m, "+", x_plus, r)
        if abs(d) > tol_deriv:
            alpha = abs(d) / math.factorial(r)
            return BoundaryClassification("nonhyperbolic", lam, r, alpha, gamma)
    raise DegenerateError(f"no nonzero derivative of order <= 6 at x={x_plus}")


# --- bifurcation of the s-shaped family -------------------------------------

def _tanh_drift_dx(b: float, x: float) -> float:
    return (b / 2.0) / math.cosh(x / 2.0) ** 2


def bifurcation_parameter(b: float) -> tuple[float, float]:
    """Noise amplitude at which the negative fixed points of h_+ collide.

    Solves d/dx drift = 1 on x < 0 by bisection (the derivative is monotone
    there), then sigma = x - drift(x) at the tangency. Requires b > 2.
    """
    if not b > 2:
        raise DomainError(f"tangency requires b > 2, got {b}")
    f = lambda x: _tanh_drift_dx(b, x) - 1.0
    a = -1.0
    while f(a) > 0:
        a *= 2.0
        if a < -1e6:
            raise DegenerateError("no tangency bracket found")
    lo, hi = a, 0.0
    for _ in range(200):
        if hi - lo <= 1e-15 * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    x_plus = 0.5 * (lo + hi)
    sigma_star = x_plus - b * math.tanh(x_plus / 2.0)
    return sigma_star, x_plus


def bifurcation_scan(
    family: str,
    b: float,
    sigma_grid,
    noise=None,
) -> list[ScanRow]:
    """Count minimal invariant intervals along an ascending noise-amplitude grid."""
    sigmas = np.asarray(sigma_grid, dtype=float)
    if sigmas.ndim != 1 or len(sigmas) == 0:
        raise ConfigError("sigma grid must be a nonempty 1-d sequence")
    if np.any(np.diff(sigmas) <= 0):
        raise ConfigError("sigma grid must be strictly ascending")
    if family == "tanh_affine":
        make = lambda s: mm.tanh_affine(b, s)
    elif family == "affine":
        make = lambda s: mm.affine(b, s)
    else:
        raise ConfigError(f"bifurcation scan supports tanh_affine and affine, got {family!r}")
    rows = []
    for s in sigmas:
        ivals = minimal_invariant_intervals(make(float(s)))
        rows.append(ScanRow(float(s), len(ivals), tuple(ivals)))
    return rows
