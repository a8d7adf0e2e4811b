"""Noise densities on [-1, 1] with exact CDFs, sampling, and boundary coefficients.

Every model has a density p with p > 0 on (-1, 1) and a polynomial boundary
factorization p(w) = beta * (1 - w)^k + o((1 - w)^k) as w -> 1. The pair
(k, beta) drives the tail-scaling constants downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import betainc, betaincinv

from .errors import ConfigError, DomainError, UnsupportedError

__all__ = [
    "NoiseModel",
    "uniform_noise",
    "poly_upper_noise",
    "poly_symmetric_noise",
    "pdf",
    "cdf",
    "survival",
    "interval_mass",
    "consecutive_masses",
    "sample",
    "boundary_coeffs",
]

NoiseKind = Literal["uniform", "poly_upper", "poly_symmetric"]

_DOMAIN_SLACK = 1e-12


def _check_k(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise UnsupportedError(f"flatness order k must be an integer, got {k!r}")
    if k < 0:
        raise UnsupportedError(f"flatness order k must be >= 0, got {k}")
    return int(k)


def _poly_symmetric_const(k: int) -> float:
    # normalizer of (1 - w^2)^k on [-1, 1]: (2k+1)! / (2^(2k+1) (k!)^2)
    return math.factorial(2 * k + 1) / (2.0 ** (2 * k + 1) * math.factorial(k) ** 2)


@dataclass(frozen=True)
class NoiseModel:
    """Noise law on [-1, 1].

    kind
        "uniform": p = 1/2.
        "poly_upper": p(w) = ((k+1)/2^(k+1)) (1-w)^k, vanishing only at w = 1.
        "poly_symmetric": p(w) = C_k (1-w^2)^k, vanishing at both endpoints.
    k
        Boundary flatness order at w = 1.
    beta
        Leading coefficient of p at w = 1; derived, do not pass.
    """

    kind: NoiseKind
    k: int = 0
    beta: float = field(init=False)

    def __post_init__(self):
        if self.kind not in ("uniform", "poly_upper", "poly_symmetric"):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        k = _check_k(self.k)
        object.__setattr__(self, "k", k)
        if self.kind == "uniform":
            if k != 0:
                raise ConfigError("uniform noise has k = 0")
            beta = 0.5
        elif self.kind == "poly_upper":
            beta = (k + 1) / 2.0 ** (k + 1)
        else:
            beta = _poly_symmetric_const(k) * 2.0**k
        object.__setattr__(self, "beta", beta)


def uniform_noise() -> NoiseModel:
    return NoiseModel("uniform", 0)


def poly_upper_noise(k: int) -> NoiseModel:
    return NoiseModel("poly_upper", k)


def poly_symmetric_noise(k: int) -> NoiseModel:
    return NoiseModel("poly_symmetric", k)


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) > 1.0 + _DOMAIN_SLACK):
        raise DomainError("omega outside [-1, 1]")
    return np.clip(w, -1.0, 1.0)


def pdf(noise: NoiseModel, omega):
    """Density value(s) at omega in [-1, 1]."""
    w = _check_omega(omega)
    if noise.kind == "uniform":
        out = np.full_like(w, 0.5)
    elif noise.kind == "poly_upper":
        out = noise.beta * (1.0 - w) ** noise.k
    else:
        out = _poly_symmetric_const(noise.k) * (1.0 - w * w) ** noise.k
    return out if out.ndim else float(out)


def cdf(noise: NoiseModel, omega):
    """Exact antiderivative of the density; clamps to {0, 1} outside [-1, 1]."""
    w = np.clip(np.asarray(omega, dtype=float), -1.0, 1.0)
    if noise.kind == "uniform":
        out = (1.0 + w) / 2.0
    elif noise.kind == "poly_upper":
        out = 1.0 - ((1.0 - w) / 2.0) ** (noise.k + 1)
    else:
        a = noise.k + 1.0
        out = betainc(a, a, (1.0 + w) / 2.0)
    return out if out.ndim else float(out)


def survival(noise: NoiseModel, omega):
    """Mass of [omega, 1], accurate in relative terms as omega -> 1."""
    w = np.clip(np.asarray(omega, dtype=float), -1.0, 1.0)
    if noise.kind == "uniform":
        out = (1.0 - w) / 2.0
    elif noise.kind == "poly_upper":
        out = ((1.0 - w) / 2.0) ** (noise.k + 1)
    else:
        # Beta(a, a) symmetry: 1 - I((1+w)/2) = I((1-w)/2)
        a = noise.k + 1.0
        out = betainc(a, a, (1.0 - w) / 2.0)
    return out if out.ndim else float(out)


def interval_mass(noise: NoiseModel, lo, hi):
    """Mass of [lo, hi] intersected with [-1, 1], stable near both endpoints."""
    lo_ = np.clip(np.asarray(lo, dtype=float), -1.0, 1.0)
    hi_ = np.clip(np.asarray(hi, dtype=float), -1.0, 1.0)
    upper = lo_ + hi_ > 0.0
    m_hi = np.where(upper, survival(noise, lo_) - survival(noise, hi_), 0.0)
    m_lo = np.where(upper, 0.0, cdf(noise, hi_) - cdf(noise, lo_))
    out = np.maximum(m_hi + m_lo, 0.0)
    return out if out.ndim else float(out)


def consecutive_masses(noise: NoiseModel, omega_edges: np.ndarray) -> np.ndarray:
    """Masses of the intervals between consecutive (ascending, clipped) edges.

    Uses the survival function on the upper half of [-1, 1] and the CDF on the
    lower half, so tail masses keep relative accuracy near both endpoints.
    """
    w = np.clip(np.asarray(omega_edges, dtype=float), -1.0, 1.0)
    c = cdf(noise, w)
    s = survival(noise, w)
    upper = (w[:-1] + w[1:]) > 0.0
    out = np.where(upper, s[:-1] - s[1:], c[1:] - c[:-1])
    return np.maximum(out, 0.0)


def sample(noise: NoiseModel, rng: np.random.Generator, size=None):
    """Inverse-CDF draws; deterministic given the generator state."""
    u = rng.random(size)
    if noise.kind == "uniform":
        out = 2.0 * u - 1.0
    elif noise.kind == "poly_upper":
        out = 1.0 - 2.0 * (1.0 - u) ** (1.0 / (noise.k + 1))
    else:
        a = noise.k + 1.0
        out = 2.0 * betaincinv(a, a, u) - 1.0
    return out


def boundary_coeffs(noise: NoiseModel) -> tuple[int, float]:
    """The (k, beta) pair of the boundary factorization at omega = 1."""
    return noise.k, noise.beta
