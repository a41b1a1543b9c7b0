"""Sharp large-deviation estimates for rescaled q-norms on l_p^n spheres and
balls, and their consequences for intersection volumes and projection
lengths.

For ``m_{p,q} < z < 1`` with ``z* = (z^q, 1)``::

    P(n^{1/p-1/q} ||Z||_q > z) ~ exp(-n Lambda^*(z*)) / (sqrt(2 pi n) kappa(z) xi(z))   (cone)
    P(n^{1/p-1/q} ||Z||_q > z) ~ exp(-n Lambda^*(z*)) / (sqrt(2 pi n) gamma(z))         (uniform)

All estimates are leading order; the ``(1 + o(1))`` factor is not modelled.

``xi(z)^2 = <H tau, tau>``.  The often-quoted form with an extra factor
``det H`` (kept as :func:`xi_as_published`) is inconsistent with the uniform
result and with simulation; see ``tests/test_sld.py``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import ComplexKappa, DegenerateTilt, InvalidParameter, NegativeBracket, RegimeViolation
from .gengauss import PqParams, m_pq
from .geometry import weingarten_LD, weingarten_LLambda
from .legendre import RatePoint, rate_norm

__all__ = [
    "SldEstimate",
    "BallConstants",
    "IntersectionEstimate",
    "rate_point",
    "xi",
    "xi_as_published",
    "kappa",
    "kappa_closed_form",
    "gamma",
    "gamma_assembly",
    "tail_cone",
    "tail_ball",
    "log_vol_ball",
    "c_np",
    "c_p",
    "ball_constants",
    "intersection_volume",
    "conjugate_exponent",
    "projection_tail",
]

VALID = "valid-asymptotic"
INVALID = "invalid-asymptotic"


@dataclass(frozen=True)
class SldEstimate:
    n: int
    z: float
    rate: float
    prefactor: float
    probability: float
    measure: str
    regime: str
    terms: dict = field(default_factory=dict, compare=False)

    @property
    def log_probability(self) -> float:
        return math.log(self.prefactor) - self.n * self.rate


@lru_cache(maxsize=1024)
def _rate_point_cached(z: float, p: float, q: float) -> RatePoint:
    return rate_norm(z, PqParams(p, q))


def rate_point(z, params: PqParams) -> RatePoint:
    """Saddle point at ``z* = (z^q, 1)`` (memoized, deterministic)."""
    return _rate_point_cached(float(z), params.p, params.q)


def _nondegenerate(z, params) -> RatePoint:
    rp = rate_point(z, params)
    if rp.tau.tau1 == 0.0 and rp.tau.tau2 == 0.0:
        raise DegenerateTilt(f"tau(z*) = 0 at z={z!r}; prefactors need z > m_(p,q)")
    return rp


def _quad_form(h, t1, t2):
    return h[0, 0] * t1 * t1 + 2.0 * h[0, 1] * t1 * t2 + h[1, 1] * t2 * t2


def xi(z, params: PqParams) -> float:
    """``sqrt(<H_{z*} tau(z*), tau(z*)>)``."""
    rp = _nondegenerate(z, params)
    return math.sqrt(_quad_form(rp.hess, rp.tau.tau1, rp.tau.tau2))


def xi_as_published(z, params: PqParams) -> float:
    """``sqrt(<H tau, tau> det H)``; differs from :func:`xi` by ``sqrt(det H)``."""
    rp = _nondegenerate(z, params)
    return math.sqrt(_quad_form(rp.hess, rp.tau.tau1, rp.tau.tau2) * rp.det_hess)


def kappa(z, params: PqParams) -> float:
    """``sqrt(1 - L_D / L_Lambda)`` from the two boundary curvatures at ``z*``."""
    rp = _nondegenerate(z, params)
    k2 = 1.0 - weingarten_LD(z, params) / weingarten_LLambda(rp)
    if not 0.0 < k2:
        raise ComplexKappa(f"1 - L_D/L_Lambda = {k2!r} <= 0 at z={z!r}")
    return math.sqrt(k2)


def kappa_closed_form(z, params: PqParams) -> float:
    rp = _nondegenerate(z, params)
    p, q = params.p, params.q
    t1, t2 = rp.tau.tau1, rp.tau.tau2
    hi = rp.hess_inv
    zq = z ** q
    num = (t1 * t1 + t2 * t2) ** 1.5 * abs(p * (p - q) * zq) / (q * q)
    den = abs(t2 * t2 * hi[0, 0] - 2.0 * t1 * t2 * hi[0, 1] + t1 * t1 * hi[1, 1]) * (zq * zq + p * p / (q * q)) ** 1.5
    k2 = 1.0 - num / den
    if not 0.0 < k2:
        raise ComplexKappa(f"closed-form kappa^2 = {k2!r} <= 0 at z={z!r}")
    return math.sqrt(k2)


def _gamma_bracket(z, params, rp):
    p, q = params.p, params.q
    hi = rp.hess_inv
    zq = z ** q
    return (
        zq * zq * q * q / (p * p) * hi[0, 0]
        + 2.0 * zq * q / p * hi[0, 1]
        + hi[1, 1]
        + rp.tau.tau1 * zq * q * (q - p) / (p * p)
    )


def gamma(z, params: PqParams) -> float:
    """Uniform-measure prefactor ``gamma(z)``.

    ``gamma^2 = det H tau1^2 (q z^q tau1 + 1)^2 [ (z^{2q} q^2/p^2) Hinv_11
    + (2 z^q q/p) Hinv_12 + Hinv_22 + tau1 z^q q (q - p)/p^2 ]``.
    """
    rp = _nondegenerate(z, params)
    q = params.q
    bracket = _gamma_bracket(z, params, rp)
    if not bracket > 0:
        raise NegativeBracket(f"second derivative along the boundary is {bracket!r} <= 0 at z={z!r}")
    t1 = rp.tau.tau1
    g2 = rp.det_hess * t1 * t1 * (q * z ** q * t1 + 1.0) ** 2 * bracket
    return math.sqrt(g2)


def gamma_assembly(z, params: PqParams) -> float:
    """``gamma(z)`` rebuilt from the Laplace-integral ingredients.

    Coordinates ``t`` map to ``(x1, x2, y) = ((t1 + z^q (1+t3)^{q/p}) / (1-t2)^q,
    1 + t3, 1 - t2)``; the exponent is ``Lambda^*(x1, x2) - log y`` and the
    amplitude ``(1-t2)^{-q} y^{-1} det(H_x)^{-1/2}``.
    """
    rp = _nondegenerate(z, params)
    p, q = params.p, params.q
    zq = z ** q
    t1, t2 = rp.tau.tau1, rp.tau.tau2
    grad_rate = np.array([t1, t2, -1.0])
    jac = np.array([[1.0, q * zq, zq * q / p], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
    grad_f = grad_rate @ jac
    hess_rate = np.zeros((3, 3))
    hess_rate[:2, :2] = rp.hess_inv
    hess_rate[2, 2] = 1.0
    d1 = jac[:, 2]
    d2 = np.array([zq * (q / p) * (q / p - 1.0), 0.0, 0.0])
    f002 = d1 @ hess_rate @ d1 + grad_rate @ d2
    if not f002 > 0:
        raise NegativeBracket(f"f~_002 = {f002!r} <= 0 at z={z!r}")
    g0 = rp.det_hess ** -0.5
    inv_gamma = g0 / (grad_f[0] * grad_f[1] * math.sqrt(f002))
    return 1.0 / inv_gamma


def _check_n(n):
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    return int(n)


def _estimate(n, z, rate, denom, measure, terms):
    prefactor = 1.0 / (math.sqrt(2.0 * math.pi * n) * denom)
    prob = prefactor * math.exp(-n * rate)
    return SldEstimate(
        n=n,
        z=float(z),
        rate=rate,
        prefactor=prefactor,
        probability=prob,
        measure=measure,
        regime=VALID if prob < 1.0 else INVALID,
        terms=terms,
    )


def tail_cone(n, z, params: PqParams) -> SldEstimate:
    """Leading-order ``P(n^{1/p-1/q} ||Z||_q > z)`` for Z cone-distributed on the l_p sphere."""
    n = _check_n(n)
    rp = _nondegenerate(z, params)
    x, k = xi(z, params), kappa(z, params)
    return _estimate(n, z, rp.rate, k * x, "cone", {"xi": x, "kappa": k, "tau1": rp.tau.tau1, "tau2": rp.tau.tau2})


def tail_ball(n, z, params: PqParams) -> SldEstimate:
    """Leading-order ``P(n^{1/p-1/q} ||Z||_q > z)`` for Z uniform in the l_p ball."""
    n = _check_n(n)
    rp = _nondegenerate(z, params)
    g = gamma(z, params)
    return _estimate(n, z, rp.rate, g, "uniform", {"gamma": g, "tau1": rp.tau.tau1, "tau2": rp.tau.tau2})


# --- ball volumes and intersection volumes ------------------------------


def log_vol_ball(n, p) -> float:
    """``log vol_n(B_p^n) = n log(2 Gamma(1 + 1/p)) - log Gamma(1 + n/p)``."""
    return n * (math.log(2.0) + gammaln(1.0 + 1.0 / p)) - gammaln(1.0 + n / p)


def c_np(n, p) -> float:
    return math.exp(math.log(n) / p + log_vol_ball(n, p) / n)


def c_p(p) -> float:
    return 2.0 * math.exp(1.0 / p) * p ** (1.0 / p) * math.exp(gammaln(1.0 + 1.0 / p))


@dataclass(frozen=True)
class BallConstants:
    n: int
    p: float
    q: float
    log_vol: float
    c_np: float
    c_p: float
    c_nq: float
    c_q: float
    c_npq: float
    A_npq: float
    A_pq: float


def ball_constants(n, params: PqParams) -> BallConstants:
    n = _check_n(n)
    p, q = params.p, params.q
    m = m_pq(p, q)
    cnp, cnq, cp, cq = c_np(n, p), c_np(n, q), c_p(p), c_p(q)
    return BallConstants(
        n=n,
        p=p,
        q=q,
        log_vol=log_vol_ball(n, p),
        c_np=cnp,
        c_p=cp,
        c_nq=cnq,
        c_q=cq,
        c_npq=cnp / cnq,
        A_npq=cnp / (m * cnq),
        A_pq=cp / (m * cq),
    )


@dataclass(frozen=True)
class IntersectionEstimate:
    n: int
    t: float
    z_eff: float
    A_t: float
    volume: float
    tail: SldEstimate


def intersection_volume(n, t, params: PqParams) -> IntersectionEstimate:
    """Leading-order ``vol_n(D_p^n cap t D_q^n) = 1 - P_uniform(rescaled q-norm > t c_{n,p,q})``
    in the regime ``A_{p,q} t > 1``."""
    n = _check_n(n)
    t = float(t)
    bc = ball_constants(n, params)
    if not bc.A_pq * t > 1.0:
        raise RegimeViolation(f"A_(p,q) t = {bc.A_pq * t!r} <= 1; only the limit-one regime is covered")
    z_eff = t * bc.c_npq
    if not z_eff > params.m:
        raise RegimeViolation(f"t c_(n,p,q) = {z_eff!r} does not exceed m_(p,q) = {params.m!r} at n={n}")
    tail = tail_ball(n, z_eff, params)
    return IntersectionEstimate(n=n, t=t, z_eff=z_eff, A_t=bc.A_pq * t, volume=1.0 - tail.probability, tail=tail)


def conjugate_exponent(q_proj) -> float:
    """``q*`` with ``1/q + 1/q* = 1`` and ``1/inf = 0``."""
    q_proj = float(q_proj)
    if q_proj == math.inf:
        return 1.0
    if not q_proj > 1:
        raise InvalidParameter(f"exponent must exceed 1, got {q_proj!r}")
    return q_proj / (q_proj - 1.0)


def projection_params(q_proj) -> PqParams:
    q_proj = float(q_proj)
    if not q_proj > 2:
        raise InvalidParameter(f"projection exponent must lie in (2, inf], got {q_proj!r}")
    return PqParams(2.0, conjugate_exponent(q_proj))


def projection_tail(n, q_proj, z) -> SldEstimate:
    """Leading-order ``P(n^{1/2-1/q} vol_1(P_theta B_q^n) > z)`` for theta cone-distributed
    on the Euclidean sphere; the projection length is ``2 ||theta||_{q*}``."""
    params = projection_params(q_proj)
    z = float(z)
    if not z > 2.0 * params.m:
        raise InvalidParameter(f"z={z!r} must exceed 2 m_(2,q*) = {2.0 * params.m!r}")
    est = tail_cone(n, z / 2.0, params)
    return SldEstimate(
        n=est.n,
        z=z,
        rate=est.rate,
        prefactor=est.prefactor,
        probability=est.probability,
        measure="projection",
        regime=est.regime,
        terms={**est.terms, "q_star": params.q},
    )
