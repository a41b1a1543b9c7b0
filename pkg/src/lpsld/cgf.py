"""Joint cumulant generating function of ``V = (|Y|^q, |Y|^p)``, ``Y ~ N_p``.

``Lambda_p(tau) = log E exp(tau1 |Y|^q + tau2 |Y|^p)`` is finite exactly for
``tau2 < 1/p``.  Its gradient and Hessian are the mean and covariance of V
under the exponentially tilted density, and are computed as tilted-moment
integrals rather than by differentiating a quadrature rule.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from .errors import DomainViolation, NumericalBreakdown, QuadratureError
from .gengauss import PqParams

__all__ = [
    "BOUNDARY_GUARD",
    "Tilt",
    "CgfEval",
    "log_phi_absq",
    "phi_absq",
    "lambda_p",
    "grad_lambda",
    "hess_lambda",
    "cgf_eval",
    "tilted_moments",
]

# tau2 closer than this to 1/p is rejected
BOUNDARY_GUARD = 1e-8
_EPSREL = 1e-13
_TAIL_DROP = 90.0  # truncate where the log-integrand is this far below its max


@dataclass(frozen=True)
class Tilt:
    tau1: float
    tau2: float

    @classmethod
    def make(cls, tau, params: PqParams) -> "Tilt":
        if isinstance(tau, Tilt):
            t1, t2 = tau.tau1, tau.tau2
        else:
            t1, t2 = (float(v) for v in tau)
        if not (math.isfinite(t1) and math.isfinite(t2)):
            raise DomainViolation(f"tilt must be finite, got ({t1}, {t2})")
        if t2 > 1.0 / params.p - BOUNDARY_GUARD:
            raise DomainViolation(
                f"tau2={t2!r} outside the effective domain tau2 < 1/p - {BOUNDARY_GUARD:g} (1/p={1.0 / params.p!r})"
            )
        return cls(t1, t2)

    def as_array(self) -> np.ndarray:
        return np.array([self.tau1, self.tau2])


@dataclass(frozen=True)
class CgfEval:
    value: float
    grad: np.ndarray
    hess: np.ndarray


def _quad(f, a, b):
    # quad warns when epsrel is out of reach; the error estimate is checked by the caller
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=_EPSREL, limit=400)


@lru_cache(maxsize=8192)
def _moments(t1: float, t2: float, p: float, q: float):
    """(log normalizer, mean, covariance) of (y^q, y^p) under the tilt."""
    c = 1.0 - p * t2  # > 0 inside the domain
    y_mode = (q * t1 / c) ** (1.0 / (p - q)) if t1 > 0 else 0.0
    big = c * y_mode ** p  # curvature scale of the exponent at the mode

    if big > 1.0:
        # Sharp interior peak.  With y = y_mode (1 + sd u) the exponent minus its
        # maximum is big ((v^q - 1)/q - (v^p - 1)/p), v = 1 + sd u; everything is
        # written through log1p/expm1 so that nothing cancels when sd is tiny.
        a = y_mode
        sd = 1.0 / math.sqrt(big * (p - q))
        e_max = big * (1.0 / q - 1.0 / p)
        base = 1.0  # moments below are of v^r - 1

        def lv(u):
            return math.log1p(sd * u) if u > -1.0 / sd else -math.inf

        def dq(u):
            return math.expm1(q * lv(u))

        def dp(u):
            return math.expm1(p * lv(u))

        coef = [(q ** (k - 1) - p ** (k - 1)) / math.factorial(k) for k in range(2, 12)]

        def rel(u):
            x = lv(u)
            if abs(x) < 1e-2:
                # series of expm1(qx)/q - expm1(px)/p, which cancels to O(x^2)
                return big * x * x * math.fsum(ck * x ** j for j, ck in enumerate(coef))
            return big * (math.expm1(q * x) / q - math.expm1(p * x) / p)

        u_lo, u_mode, jac = -1.0 / sd, 0.0, sd
    else:
        a = 1.0
        e_max = t1 * y_mode ** q - (c / p) * y_mode ** p
        base = 0.0

        def dq(u):
            return u ** q

        def dp(u):
            return u ** p

        def rel(u):
            return t1 * u ** q - (c / p) * u ** p - e_max

        u_lo, u_mode, jac = 0.0, y_mode, 1.0

    hi = max(2.0 * u_mode, 1.0)
    while rel(hi) > -_TAIL_DROP:
        hi *= 2.0
    u_max = optimize.brentq(lambda u: rel(u) + _TAIL_DROP, max(u_mode, 1e-300), hi, xtol=1e-14 * max(1.0, u_mode))

    def w(u):
        return math.exp(rel(u))

    cuts = {u_lo, u_mode, u_max}
    if base:
        cuts.update((max(-8.0, u_lo), min(8.0, u_max)))
    cuts = sorted(cuts)
    pieces = list(zip(cuts[:-1], cuts[1:]))

    def integral(g, scale=None):
        parts = [_quad(g, lo, hi) for lo, hi in pieces]
        val = math.fsum(v for v, _ in parts)
        err = math.fsum(e for _, e in parts)
        size = max(scale or 0.0, math.fsum(abs(v) for v, _ in parts))
        if not math.isfinite(val) or err > 1e-9 * size + 1e-300:
            raise QuadratureError(
                f"quadrature on [{pieces[0][0]:g}, {pieces[-1][1]:g}] did not converge: "
                f"value={val!r}, error estimate={err!r}"
            )
        return val

    i0 = integral(w)
    d1 = integral(lambda u: dq(u) * w(u)) / i0
    d2 = integral(lambda u: dp(u) * w(u)) / i0
    v11 = integral(lambda u: (dq(u) - d1) ** 2 * w(u)) / i0
    v12 = integral(lambda u: (dq(u) - d1) * (dp(u) - d2) * w(u)) / i0
    # residual variance of the p-part after regressing on the q-part; near the
    # support curve the two are almost collinear and v11 v22 - v12^2 cancels
    beta = v12 / v11
    res = integral(lambda u: (dp(u) - d2 - beta * (dq(u) - d1)) ** 2 * w(u), scale=beta * v12 * i0) / i0
    v22 = res + beta * v12
    aq, ap = a ** q, a ** p
    mu1, mu2 = aq * (base + d1), ap * (base + d2)
    c11, c12, c22 = aq * aq * v11, aq * ap * v12, ap * ap * v22
    det = (aq * ap) ** 2 * v11 * res

    # f_p normalizer, folded onto [0, inf): 2 * 1 / (2 p^{1/p} Gamma(1+1/p))
    log_norm = e_max + math.log(a * jac) + math.log(i0) - (math.log(p) / p + gammaln(1.0 + 1.0 / p))
    return log_norm, (mu1, mu2), ((c11, c12), (c12, c22)), det


def tilted_moments(tau, params: PqParams):
    """Log normalizer, mean 2-vector and covariance 2x2 of V under ``tau``."""
    t = Tilt.make(tau, params)
    log_norm, mean, cov, _ = _moments(t.tau1, t.tau2, params.p, params.q)
    return log_norm, np.array(mean), np.array(cov)


def tilted_cov_det(tau, params: PqParams) -> float:
    """Determinant of the tilted covariance, computed without cancellation."""
    t = Tilt.make(tau, params)
    return _moments(t.tau1, t.tau2, params.p, params.q)[3]


def log_phi_absq(t, params: PqParams) -> float:
    """``log E exp(t |X|^q)`` for ``X ~ N_p``; finite for every real t since q < p."""
    t = float(t)
    return _moments(t, 0.0, params.p, params.q)[0]


def phi_absq(t, params: PqParams) -> float:
    """Moment generating function of ``|X|^q``, ``X ~ N_p``."""
    return math.exp(log_phi_absq(t, params))


def lambda_p(tau, params: PqParams) -> float:
    """Joint c.g.f., evaluated through the one-dimensional reduction

    ``Lambda_p(s) = -log(1 - p s2)/p + log phi_{|X|^q}(s1 (1 - p s2)^{-q/p})``.
    """
    t = Tilt.make(tau, params)
    p, q = params.p, params.q
    c = 1.0 - p * t.tau2
    return -math.log(c) / p + log_phi_absq(t.tau1 * c ** (-q / p), params)


def grad_lambda(tau, params: PqParams) -> np.ndarray:
    return tilted_moments(tau, params)[1]


def hess_lambda(tau, params: PqParams) -> np.ndarray:
    h = tilted_moments(tau, params)[2]
    _check_spd(h, tau)
    return h


def _check_spd(h, tau):
    det = h[0, 0] * h[1, 1] - h[0, 1] ** 2
    if not (h[0, 0] > 0 and h[1, 1] > 0 and det > 1e-14 * h[0, 0] * h[1, 1]):
        raise NumericalBreakdown(f"c.g.f. Hessian not positive definite at tau={tau}: {h.tolist()}")


def cgf_eval(tau, params: PqParams) -> CgfEval:
    t = Tilt.make(tau, params)
    _, mean, cov = tilted_moments(t, params)
    _check_spd(cov, t)
    return CgfEval(lambda_p(t, params), mean, cov)
