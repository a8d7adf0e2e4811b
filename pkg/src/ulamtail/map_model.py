"""Random interval maps x' = h(x, omega) with bounded noise omega in [-1, 1].

Built-in families are additive, h(x, omega) = f(x) + sigma*omega + const, and are
monotone increasing in both arguments on their default domains:

    tanh_affine   h = b (1 - e^-x)/(1 + e^-x) + sigma*omega
    affine        h = lam*x + sigma*omega
    power_nonhyp  h = x + alpha*|x|^r + sigma*(omega - 1), on a left neighborhood of 0

User-supplied maps enter as callables; derivatives fall back to central differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from . import noise as noise_mod
from .errors import ConfigError, DomainError, NonMonotoneError, OutOfRangeError

__all__ = [
    "MapFamily",
    "RandomMapSpec",
    "DerivativeBundle",
    "tanh_affine",
    "affine",
    "power_nonhyp",
    "user_tabulated",
    "eval_map",
    "extremal",
    "partials",
    "section_inverse",
    "section_inverse_clipped",
    "transition_density",
    "validate_h1",
    "extremal_derivative",
]

MapFamily = Literal["tanh_affine", "affine", "power_nonhyp", "user_tabulated"]

_FD_STEP = float(np.cbrt(np.finfo(float).eps))
_INVERSE_TOL = 1e-12


@dataclass(frozen=True)
class RandomMapSpec:
    """Immutable description of one random map. Use the factory functions."""

    family: MapFamily
    domain: tuple[float, float]
    b: float | None = None
    lam: float | None = None
    alpha: float | None = None
    r: int | None = None
    sigma: float | None = None
    h: Callable | None = None
    dh_dx: Callable | None = None
    dh_domega: Callable | None = None
    noise_interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        lo, hi = self.domain
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigError(f"degenerate domain {self.domain!r}")


@dataclass(frozen=True)
class DerivativeBundle:
    """Partial derivatives of h at one point; higher x-derivatives of h_+ optional."""

    dx: float
    domega: float
    higher: tuple[float, ...] | None = None


def tanh_affine(b: float, sigma: float, domain: tuple[float, float] | None = None) -> RandomMapSpec:
    if not b > 0:
        raise ConfigError(f"tanh_affine needs b > 0, got {b}")
    if not sigma > 0:
        raise ConfigError(f"tanh_affine needs sigma > 0, got {sigma}")
    if domain is None:
        reach = b + sigma + 1.0
        domain = (-reach, reach)
    return RandomMapSpec("tanh_affine", domain, b=float(b), sigma=float(sigma))


def affine(lam: float, sigma: float, domain: tuple[float, float] | None = None) -> RandomMapSpec:
    # lam = 0 admitted: the i.i.d. pure-noise reference chain
    if not 0 <= lam < 1:
        raise ConfigError(f"affine needs 0 <= lam < 1, got {lam}")
    if not sigma > 0:
        raise ConfigError(f"affine needs sigma > 0, got {sigma}")
    if domain is None:
        reach = sigma / (1.0 - lam) + 1.0
        domain = (-reach, reach)
    return RandomMapSpec("affine", domain, lam=float(lam), sigma=float(sigma))


def power_nonhyp(alpha: float, r: int, sigma: float, domain: tuple[float, float] | None = None) -> RandomMapSpec:
    if not alpha > 0:
        raise ConfigError(f"power_nonhyp needs alpha > 0, got {alpha}")
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or r < 2:
        raise ConfigError(f"power_nonhyp needs integer r >= 2, got {r!r}")
    if not sigma > 0:
        raise ConfigError(f"power_nonhyp needs sigma > 0, got {sigma}")
    if domain is None:
        # keep d/dx (x + alpha*|x|^r) = 1 - alpha*r*|x|^(r-1) positive on the domain
        reach = 0.9 * (1.0 / (alpha * r)) ** (1.0 / (r - 1))
        domain = (-reach, 0.0)
    return RandomMapSpec("power_nonhyp", domain, alpha=float(alpha), r=int(r), sigma=float(sigma))


def user_tabulated(
    h: Callable,
    domain: tuple[float, float],
    dh_dx: Callable | None = None,
    dh_domega: Callable | None = None,
) -> RandomMapSpec:
    if not callable(h):
        raise ConfigError("user_tabulated needs a callable h(x, omega)")
    return RandomMapSpec("user_tabulated", domain, h=h, dh_dx=dh_dx, dh_domega=dh_domega)


# --- evaluation -----------------------------------------------------------

def _drift(m: RandomMapSpec, x):
    """Deterministic part f(x) of an additive family, vectorized."""
    x = np.asarray(x, dtype=float)
    if m.family == "tanh_affine":
        return m.b * np.tanh(x / 2.0)
    if m.family == "affine":
        return m.lam * x
    if m.family == "power_nonhyp":
        return x + m.alpha * np.abs(x) ** m.r
    raise ConfigError(f"{m.family} has no closed-form drift")


def _noise_offset(m: RandomMapSpec) -> float:
    return -m.sigma if m.family == "power_nonhyp" else 0.0


def _is_additive(m: RandomMapSpec) -> bool:
    return m.family != "user_tabulated"


def _raw_eval(m: RandomMapSpec, x, omega):
    if _is_additive(m):
        return _drift(m, x) + m.sigma * np.asarray(omega, dtype=float) + _noise_offset(m)
    return m.h(x, omega)


def _domain_slack(m: RandomMapSpec) -> float:
    lo, hi = m.domain
    return 1e-12 * max(1.0, abs(lo), abs(hi))

def _check_x(m: RandomMapSpec, x):
    lo, hi = m.domain
    slack = _domain_slack(m)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < lo - slack) or np.any(xa > hi + slack):
        raise DomainError(f"x outside domain [{lo}, {hi}]")

def _check_omega(omega):
    wa = np.asarray(omega, dtype=float)
    if np.any(np.abs(wa) > 1.0 + 1e-12):
        raise DomainError("omega outside [-1, 1]")


def eval_map(m: RandomMapSpec, x, omega):
    """h(x, omega); accepts scalars or broadcastable arrays."""
    _check_x(m, x)
    _check_omega(omega)
    out = _raw_eval(m, x, omega)
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def _sign_value(sign) -> float:
    if sign in ("+", +1, 1.0):
        return 1.0
    if sign in ("-", -1, -1.0):
        return -1.0
    raise ConfigError(f"sign must be '+' or '-', got {sign!r}")


def extremal(m: RandomMapSpec, sign, x):
    """Extremal map h(x, +1) or h(x, -1)."""
    return eval_map(m, x, _sign_value(sign))


# --- derivatives ----------------------------------------------------------

def _dx_analytic(m: RandomMapSpec, x):
    x = np.asarray(x, dtype=float)
    if m.family == "tanh_affine":
        return (m.b / 2.0) / np.cosh(x / 2.0) ** 2
    if m.family == "affine":
        return np.full_like(x, m.lam)
    if m.family == "power_nonhyp":
        return 1.0 + m.alpha * m.r * np.abs(x) ** (m.r - 1) * np.sign(x)
    raise ConfigError(f"{m.family} has no analytic derivative")


def _fd_partial(f: Callable, u: float, step: float) -> float:
    return (f(u + step) - f(u - step)) / (2.0 * step)


def partials(m: RandomMapSpec, x: float, omega: float) -> DerivativeBundle:
    """(d/dx h, d/domega h) at one point; raises if either is <= 0."""
    _check_x(m, x)
    _check_omega(omega)
    if _is_additive(m):
        dx = float(_dx_analytic(m, x))
        domega = m.sigma
    else:
        if m.dh_dx is not None:
            dx = float(m.dh_dx(x, omega))
        else:
            dx = _fd_partial(lambda u: m.h(u, omega), x, _FD_STEP * max(1.0, abs(x)))
        if m.dh_domega is not None:
            domega = float(m.dh_domega(x, omega))
        else:
            domega = _fd_partial(lambda w: m.h(x, w), omega, _FD_STEP * max(1.0, abs(omega)))
    if dx <= 0 or domega <= 0:
        raise NonMonotoneError(
            f"monotonicity fails at (x={x}, omega={omega}): dx={dx}, domega={domega}"
        )
    return DerivativeBundle(dx=dx, domega=domega)


def _domega_unchecked(m: RandomMapSpec, x: float, omega: float) -> float:
    if _is_additive(m):
        return m.sigma
    if m.dh_domega is not None:
        return float(m.dh_domega(x, omega))
    return _fd_partial(lambda w: m.h(x, w), omega, _FD_STEP * max(1.0, abs(omega)))


def _tanh_poly_coeffs(order: int) -> np.ndarray:
    # T = b*t with t = tanh(x/2); dt/dx = (1 - t^2)/2. Successive x-derivatives
    # of t are polynomials in t: q_(m+1) = q_m' * (1 - t^2)/2.
    from numpy.polynomial import polynomial as P

    q = np.array([0.5, 0.0, -0.5])
    for _ in range(order - 1):
        q = P.polymul(P.polyder(q), np.array([0.5, 0.0, -0.5]))
    return q


def extremal_derivative(m: RandomMapSpec, sign, x: float, order: int) -> float:
    """order-th x-derivative of the extremal map at x (one-sided at 0 for kinks)."""
    from numpy.polynomial import polynomial as P

    if order < 1:
        raise ConfigError("derivative order must be >= 1")
    if m.family == "tanh_affine":
        t = math.tanh(x / 2.0)
        return m.b * float(P.polyval(t, _tanh_poly_coeffs(order)))
    if m.family == "affine":
        return m.lam if order == 1 else 0.0
    if m.family == "power_nonhyp":
        base = 1.0 if order == 1 else 0.0
        if order > m.r:
            return base
        # d^m/dx^m alpha*|x|^r taken from the left of 0 on x <= 0
        s = -1.0 if x <= 0 else 1.0
        coeff = m.alpha * math.factorial(m.r) / math.factorial(m.r - order)
        return base + coeff * (s**order) * (s * x) ** (m.r - order)
    # user maps: Richardson-extrapolated central differences
    f = lambda u: m.h(u, _sign_value(sign))
    return _richardson_derivative(f, x, order)


def _central_diff(f: Callable, x: float, order: int, step: float) -> float:
    # central stencils up to order 6
    offsets_weights = {
        1: ((-1, -0.5), (1, 0.5)),
        2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
        3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
        4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
        5: ((-3, -0.5), (-2, 2.0), (-1, -2.5), (1, 2.5), (2, -2.0), (3, 0.5)),
        6: ((-3, 1.0), (-2, -6.0), (-1, 15.0), (0, -20.0), (1, 15.0), (2, -6.0), (3, 1.0)),
    }
    acc = 0.0
    for off, w in offsets_weights[order]:
        acc += w * f(x + off * step)
    return acc / step**order


def _richardson_derivative(f: Callable, x: float, order: int) -> float:
    step = (np.finfo(float).eps) ** (1.0 / (order + 2)) * max(1.0, abs(x))
    d1 = _central_diff(f, x, order, step)
    d2 = _central_diff(f, x, order, step / 2.0)
    return (4.0 * d2 - d1) / 3.0


# --- section inverse and transition density --------------------------------

def section_inverse(m: RandomMapSpec, x: float, y):
    """The omega in [-1, 1] with h(x, omega) = y; monotone in y.

    Raises OutOfRangeError when y is outside [h_-(x), h_+(x)].
    """
    _check_x(m, x)
    y_arr = np.asarray(y, dtype=float)
    lo = _raw_eval(m, x, -1.0)
    hi = _raw_eval(m, x, 1.0)
    tol = _INVERSE_TOL * np.maximum(1.0, np.abs(y_arr))
    if np.any(y_arr < lo - tol) or np.any(y_arr > hi + tol):
        raise OutOfRangeError(f"y outside [h_-(x), h_+(x)] = [{lo}, {hi}] at x={x}")
    if _is_additive(m):
        w = (y_arr - _drift(m, x) - _noise_offset(m)) / m.sigma
    else:
        w = _bisect_omega(m, x, y_arr)
    w = np.clip(w, -1.0, 1.0)
    return w if w.ndim else float(w)


def _call_h(m: RandomMapSpec, x, w):
    """Evaluate a user callable on arrays, falling back to elementwise calls."""
    want = np.broadcast(np.asarray(x, dtype=float), np.asarray(w, dtype=float)).shape
    try:
        out = np.asarray(m.h(x, w), dtype=float)
        if out.shape == want:
            return out
    except Exception:
        pass
    return np.vectorize(lambda xx, ww: float(m.h(xx, ww)))(x, w)


def _bisect_omega(m: RandomMapSpec, x: float, y: np.ndarray) -> np.ndarray:
    y = np.atleast_1d(y)
    lo = np.full(y.shape, -1.0)
    hi = np.full(y.shape, 1.0)
    for _ in range(48):  # halves [-1, 1] down to width ~7e-15
        mid = 0.5 * (lo + hi)
        vals = _call_h(m, x, mid)
        go_right = vals < y
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    w = 0.5 * (lo + hi)
    # one Newton polish
    dw = np.array([max(_domega_unchecked(m, x, wi), 1e-30) for wi in np.ravel(w)]).reshape(w.shape)
    w = w - (_call_h(m, x, w) - y) / dw
    return np.clip(w, -1.0, 1.0).reshape(np.shape(y))


def section_inverse_clipped(m: RandomMapSpec, x: float, y):
    """section_inverse with y clipped into [h_-(x), h_+(x)] instead of raising."""
    y_arr = np.asarray(y, dtype=float)
    lo = _raw_eval(m, x, -1.0)
    hi = _raw_eval(m, x, 1.0)
    y_clipped = np.clip(y_arr, lo, hi)
    if _is_additive(m):
        w = (y_clipped - _drift(m, x) - _noise_offset(m)) / m.sigma
    else:
        w = _bisect_omega(m, x, y_clipped)
    w = np.clip(w, -1.0, 1.0)
    return w if w.ndim else float(w)


def transition_density(m: RandomMapSpec, noise: noise_mod.NoiseModel, x, y):
    """One-step kernel k(x, y) = p(h_x^-1(y)) / (d/domega h); zero off [h_-(x), h_+(x)]."""
    _check_x(m, x)
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if _is_additive(m):
        w = (y_arr - _drift(m, x_arr) - _noise_offset(m)) / m.sigma
        inside = np.abs(w) <= 1.0
        dens = np.where(inside, noise_mod.pdf(noise, np.clip(w, -1.0, 1.0)), 0.0) / m.sigma
        return dens if dens.ndim else float(dens)
    if x_arr.ndim:
        raise ConfigError("array x is only supported for the closed-form families")
    lo = float(m.h(x, -1.0))
    hi = float(m.h(x, 1.0))
    y1 = np.atleast_1d(y_arr)
    out = np.zeros(y1.shape)
    inside = (y1 >= lo) & (y1 <= hi)
    if np.any(inside):
        w = _bisect_omega(m, float(x_arr), y1[inside])
        dw = np.array([_domega_unchecked(m, float(x_arr), wi) for wi in np.ravel(w)])
        out[inside] = noise_mod.pdf(noise, w) / dw.reshape(w.shape)
    out = out.reshape(y_arr.shape)
    return out if out.ndim else float(out)


def validate_h1(m: RandomMapSpec, n_grid: int = 256) -> bool:
    """Sampled check that h is strictly increasing in x and omega on the domain.

    Raises NonMonotoneError at the first offending grid point; returns True otherwise.
    """
    lo, hi = m.domain
    xs = np.linspace(lo, hi, n_grid)
    ws = np.linspace(-1.0, 1.0, n_grid)
    vals = np.empty((n_grid, n_grid))
    if _is_additive(m):
        vals[:] = _drift(m, xs)[:, None] + m.sigma * ws[None, :] + _noise_offset(m)
        dx = _dx_analytic(m, xs)
        if np.any(dx <= 0):
            bad = xs[np.argmax(dx <= 0)]
            raise NonMonotoneError(f"d/dx h <= 0 at x={bad}")
        if m.sigma <= 0:
            raise NonMonotoneError("d/domega h <= 0")
    else:
        for j, w in enumerate(ws):
            vals[:, j] = [float(m.h(xv, w)) for xv in xs]
    if np.any(np.diff(vals, axis=0) <= 0):
        i, j = np.unravel_index(np.argmax(np.diff(vals, axis=0) <= 0), (n_grid - 1, n_grid))
        raise NonMonotoneError(f"h not increasing in x near (x={xs[i]}, omega={ws[j]})")
    if np.any(np.diff(vals, axis=1) <= 0):
        i, j = np.unravel_index(np.argmax(np.diff(vals, axis=1) <= 0), (n_grid, n_grid - 1))
        raise NonMonotoneError(f"h not increasing in omega near (x={xs[i]}, omega={ws[j]})")
    return True
