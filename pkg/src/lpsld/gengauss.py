"""Generalized Gaussian N_p, its moments, and samplers for the cone and
uniform measures on l_p^n spheres and balls.

N_p has density ``exp(-|y|^p / p) / (2 p^{1/p} Gamma(1 + 1/p))``.  If
``X ~ N_p`` then ``|X|^p / p ~ Gamma(1/p)``, which gives an exact sampler.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import InvalidParameter

__all__ = [
    "PqParams",
    "LpVector",
    "density_fp",
    "log_density_fp",
    "moment_Mp",
    "m_pq",
    "lp_norm",
    "make_rng",
    "substreams",
    "sample_np",
    "sample_abs_pow",
    "sample_cone",
    "sample_ball",
]


def _check_p(p):
    if not (isinstance(p, (int, float, np.floating, np.integer)) and math.isfinite(p)) or p < 1:
        raise InvalidParameter(f"exponent p must be finite and >= 1, got {p!r}")
    return float(p)


@dataclass(frozen=True)
class PqParams:
    """Exponent pair with ``1 <= q < p < inf``."""

    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise InvalidParameter(f"{name} must be a real number, got {v!r}") from None
            if not math.isfinite(v):
                raise InvalidParameter(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if not (1.0 <= self.q < self.p):
            raise InvalidParameter(f"need 1 <= q < p < inf, got p={self.p}, q={self.q}")

    @property
    def m(self) -> float:
        """Limit mean ``m_{p,q}`` of the rescaled q-norm."""
        return m_pq(self.p, self.q)


@dataclass(frozen=True)
class LpVector:
    coords: np.ndarray
    p: float

    @property
    def n(self) -> int:
        return self.coords.shape[-1]

    def norm(self, r=None) -> float:
        return lp_norm(self.coords, self.p if r is None else r)


def log_density_fp(y, p):
    p = _check_p(p)
    y = np.asarray(y, dtype=float)
    return -np.abs(y) ** p / p - (math.log(2.0) + math.log(p) / p + gammaln(1.0 + 1.0 / p))


def density_fp(y, p):
    """Density of N_p at ``y``."""
    out = np.exp(log_density_fp(y, p))
    return float(out) if out.ndim == 0 else out


def moment_Mp(p, r):
    """Absolute moment ``E|X|^r`` for ``X ~ N_p`` (r > -1)."""
    p = _check_p(p)
    if not math.isfinite(r) or r <= -1:
        raise InvalidParameter(f"moment order must be finite and > -1, got {r!r}")
    log_m = (r / p) * math.log(p) + gammaln(1.0 + (r + 1.0) / p) - math.log(r + 1.0) - gammaln(1.0 + 1.0 / p)
    return math.exp(log_m)


def m_pq(p, q):
    return moment_Mp(p, q) ** (1.0 / q)


def lp_norm(x, p):
    """l_p norm of ``x`` along the last axis; ``p = inf`` gives the max norm."""
    if p != math.inf:
        p = _check_p(p)
    x = np.abs(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("coordinates must be finite")
    if p == math.inf:
        out = x.max(axis=-1)
    else:
        # scale by the max to avoid overflow/underflow of |x|^p
        scale = x.max(axis=-1, keepdims=True)
        safe = np.where(scale > 0, scale, 1.0)
        out = (safe * (np.sum((x / safe) ** p, axis=-1, keepdims=True)) ** (1.0 / p))[..., 0]
        out = np.where(scale[..., 0] > 0, out, 0.0)
    return float(out) if np.ndim(out) == 0 else out


# --- random streams -------------------------------------------------------

def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(seed))


def substreams(seed, k):
    """``k`` independent generators derived deterministically from ``seed``."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(k)]


def sample_abs_pow(p, rng, size=None):
    """Draw ``|X|^p`` for ``X ~ N_p``; this is Gamma(shape 1/p, scale p)."""
    p = _check_p(p)
    return rng.gamma(1.0 / p, p, size=size)


def sample_np(p, rng, size=None):
    """Draw from N_p via ``sign * Gamma(1/p, scale p)^{1/p}``."""
    g = sample_abs_pow(p, rng, size)
    sign = rng.integers(0, 2, size=size) * 2 - 1
    return sign * g ** (1.0 / _check_p(p))


def _check_n(n):
    if int(n) != n or n < 1:
        raise InvalidParameter(f"dimension n must be a positive integer, got {n!r}")
    return int(n)


def sample_cone(n, p, rng):
    """One point of the cone measure C_{n,p}: ``Y / ||Y||_p``."""
    n = _check_n(n)
    y = sample_np(p, rng, size=n)
    return LpVector(y / lp_norm(y, p), float(p))


def sample_ball(n, p, rng):
    """One point of the uniform measure on the l_p^n ball: ``U^{1/n} Y / ||Y||_p``."""
    n = _check_n(n)
    y = sample_np(p, rng, size=n)
    u = rng.random()
    return LpVector(u ** (1.0 / n) * y / lp_norm(y, p), float(p))
