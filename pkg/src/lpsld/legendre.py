"""Saddle-point solver for ``grad Lambda_p(tau) = x``, the Legendre-Fenchel
transform ``Lambda_p^*``, the q-norm rate functions and the leading-order
local densities of the empirical means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .cgf import BOUNDARY_GUARD, Tilt, _moments, tilted_cov_det, tilted_moments
from .errors import InvalidParameter, MaxIterations, NotAdmissible, NumericalBreakdown
from .gengauss import PqParams

__all__ = [
    "RatePoint",
    "admissible_ratio_bound",
    "is_admissible",
    "solve_tau",
    "legendre_transform",
    "rate_norm",
    "rate_uniform",
    "rate_scr",
    "density_cone",
    "density_ball",
]

TOL = 1e-10
MAX_ITER = 100


@dataclass(frozen=True)
class RatePoint:
    """A deviation point with its saddle ``tau(x)``, the rate ``Lambda_p^*(x)``
    and the tilted covariance ``H_x`` (plus inverse)."""

    x: np.ndarray
    tau: Tilt
    rate: float
    hess: np.ndarray
    hess_inv: np.ndarray
    hess_det: float = math.nan
    iterations: int = 0
    residual: float = 0.0
    params: PqParams | None = field(default=None, compare=False)

    @property
    def det_hess(self) -> float:
        if math.isfinite(self.hess_det):
            return self.hess_det
        h = self.hess
        return float(h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0])


def admissible_ratio_bound(params: PqParams) -> float:
    """Supremum ``K`` of ``x2 / x1^{p/q}`` over the gradient image of ``Lambda_p``.

    The c.g.f. is not steep: as ``tau2 -> 1/p`` with ``tau1 < 0`` the tilted
    law of ``|Y|`` tends to a law with density proportional to
    ``exp(-a y^q)``, whose ratio ``E y^p / (E y^q)^{p/q}`` is ``K`` for every
    scale ``a``.
    """
    p, q = params.p, params.q
    return math.exp(gammaln((p + 1.0) / q) + (p / q - 1.0) * gammaln(1.0 / q) - (p / q) * gammaln(1.0 + 1.0 / q))


def is_admissible(x, params: PqParams) -> bool:
    """Membership in the gradient image of ``Lambda_p``:
    ``{x1 > 0, 1 < x2 / x1^{p/q} < K}`` with ``K`` from :func:`admissible_ratio_bound`.

    The image is invariant under ``(x1, x2) -> (s^q x1, s^p x2)`` (rescaling
    ``|Y|``), so only the ratio matters.  Every ``z* = (z^q, 1)`` with
    ``m_{p,q} <= z < 1`` lies inside.
    """
    x1, x2 = float(x[0]), float(x[1])
    if not (x1 > 0 and x2 > 0):
        return False
    log_ratio = math.log(x2) - (params.p / params.q) * math.log(x1)
    return 0.0 < log_ratio < math.log(admissible_ratio_bound(params))


def _inv2(h, det):
    if not det > 0:
        raise NumericalBreakdown(f"tilted covariance is singular: {h.tolist()}")
    return np.array([[h[1, 1], -h[0, 1]], [-h[1, 0], h[0, 0]]]) / det


def _reduced_start(x, params: PqParams) -> np.ndarray:
    """Saddle point through the one-parameter reduction.

    Under the tilt, ``|Y|`` is ``c^{-1/p} W`` with ``c = 1 - p tau2`` and W of
    density proportional to ``exp(s w^q - w^p / p)``, ``s = tau1 c^{-q/p}``.
    The ratio ``x2 / x1^{p/q}`` depends on s alone and decreases from K to 1,
    so s is a bracketed root; c then follows from ``x2 = E W^p / c``.
    """
    p, q = params.p, params.q
    target = math.log(x[1]) - (p / q) * math.log(x[0])

    def excess(s):
        _, (mq, mp), _, _ = _moments(s, 0.0, p, q)
        return math.log(mp) - (p / q) * math.log(mq) - target

    f0 = excess(0.0)
    if f0 == 0.0:
        s = 0.0
    else:
        direction = 1.0 if f0 > 0 else -1.0
        lo, step = 0.0, 1.0
        while True:
            hi = direction * step
            if (excess(hi) > 0) != (f0 > 0):
                break
            lo, step = hi, 2.0 * step
            if step > 2.0 ** 60:
                raise NotAdmissible(f"x={x.tolist()} is numerically on the boundary of the admissible domain")
        s = optimize.brentq(excess, min(lo, hi), max(lo, hi), xtol=1e-15, rtol=4.0 * np.finfo(float).eps)
    _, (mq, mp), _, _ = _moments(s, 0.0, p, q)
    c = mp / x[1]
    if not c > p * BOUNDARY_GUARD:
        raise NotAdmissible(f"x={x.tolist()} needs tau2 within {BOUNDARY_GUARD:g} of 1/p")
    return np.array([s * c ** (q / p), (1.0 - c) / p])


def solve_tau(x, params: PqParams, tau0=None) -> RatePoint:
    """Solve ``grad Lambda_p(tau) = x``.

    Without ``tau0`` the start comes from a one-dimensional bracketed root
    (see :func:`_reduced_start`); with it, from ``tau0``.  Either way damped
    Newton polishes the tilt: steps are halved until the dual objective
    ``Lambda_p(tau) - <x, tau>`` shows an Armijo decrease and ``tau2`` stays
    inside the guarded domain.  A warm start that stalls falls back to the
    reduction.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (2,) or not np.all(np.isfinite(x)):
        raise InvalidParameter(f"deviation point must be a finite 2-vector, got {x!r}")
    if x[0] <= 0 or x[1] <= 0:
        raise InvalidParameter(f"deviation point must have positive coordinates, got {x.tolist()}")
    if not is_admissible(x, params):
        raise NotAdmissible(
            f"x={x.tolist()} lies outside the admissible domain 1 < x2/x1^(p/q) < {admissible_ratio_bound(params)!r}"
            f" for (p, q)=({params.p}, {params.q})"
        )
    if tau0 is not None:
        try:
            return _newton(x, params, Tilt.make(tau0, params).as_array())
        except (MaxIterations, _Stalled):
            pass
    try:
        return _newton(x, params, _reduced_start(x, params))
    except _Stalled as exc:
        raise MaxIterations(
            f"Newton stalled for x={x.tolist()} at tau={exc.args[0].tolist()}", diagnostics={"tau": exc.args[0].tolist()}
        ) from None


class _Stalled(Exception):
    pass


def _newton(x, params, tau):
    p = params.p
    scale = max(1.0, float(np.max(np.abs(x))))
    lam, mean, cov = tilted_moments(tau, params)
    g = mean - x
    obj = lam - x @ tau
    history = []
    for it in range(MAX_ITER + 1):
        res = float(np.max(np.abs(g))) / scale
        history.append(res)
        if res <= TOL:
            break
        if it == MAX_ITER:
            raise MaxIterations(
                f"Newton did not converge for x={x.tolist()} after {MAX_ITER} iterations (residual {res:.3e})",
                diagnostics={"tau": tau.tolist(), "residuals": history},
            )
        step = -np.linalg.solve(cov, g)
        slope = g @ step  # < 0 since cov is SPD
        alpha = 1.0
        for _ in range(60):
            trial = tau + alpha * step
            if trial[1] < 1.0 / p - BOUNDARY_GUARD:
                t_lam, t_mean, t_cov = tilted_moments(trial, params)
                t_obj = t_lam - x @ trial
                if t_obj <= obj + 1e-4 * alpha * slope or abs(t_obj - obj) <= 1e-15 * max(1.0, abs(obj)):
                    break
            alpha *= 0.5
        else:
            raise _Stalled(tau)
        tau, lam, mean, cov, obj = trial, t_lam, t_mean, t_cov, t_obj
        g = mean - x
    rate = float(x @ tau - lam)
    det = tilted_cov_det(tau, params)
    rate = max(rate, 0.0) if rate > -1e-12 else rate
    return RatePoint(
        x=x,
        tau=Tilt(float(tau[0]), float(tau[1])),
        rate=rate,
        hess=cov,
        hess_inv=_inv2(cov, det),
        hess_det=det,
        iterations=it,
        residual=history[-1],
        params=params,
    )


def legendre_transform(x, params: PqParams, tau0=None) -> float:
    """``Lambda_p^*(x)``."""
    return solve_tau(x, params, tau0).rate


def _check_z(z, params, strict):
    z = float(z)
    m = params.m
    if not math.isfinite(z) or z < m or (strict and z <= m):
        raise InvalidParameter(f"deviation level z={z!r} must exceed m_(p,q)={m!r}")
    if z >= 1.0:
        raise NotAdmissible(f"z*=(z^q, 1) is not admissible for z={z!r} >= 1 (the rescaled q-norm never exceeds 1)")
    return z


def rate_norm(z, params: PqParams, tau0=None) -> RatePoint:
    """Rate-function point at ``z* = (z^q, 1)``, the minimizer over the boundary
    of the deviation area ``{t1^{1/q} t2^{-1/p} > z}``."""
    z = _check_z(z, params, strict=False)
    if z == params.m:
        # the mean of V; the tilt is exactly zero
        _, mean, cov = tilted_moments((0.0, 0.0), params)
        det = tilted_cov_det((0.0, 0.0), params)
        return RatePoint(
            x=np.array([z ** params.q, 1.0]), tau=Tilt(0.0, 0.0), rate=0.0,
            hess=cov, hess_inv=_inv2(cov, det), hess_det=det,
            residual=float(np.max(np.abs(mean - (z ** params.q, 1.0)))), params=params,
        )
    return solve_tau((z ** params.q, 1.0), params, tau0)


def rate_uniform(z, params: PqParams) -> float:
    """Rate of the rescaled q-norm under the uniform measure; equals the cone rate."""
    z = _check_z(z, params, strict=True)
    return rate_norm(z, params).rate


def rate_scr(t, params: PqParams, tau0=None) -> float:
    """``Lambda_p^*(t1, t2) - log t3`` for ``t3 in (0, 1]``."""
    t1, t2, t3 = (float(v) for v in t)
    if not 0 < t3 <= 1:
        raise InvalidParameter(f"third coordinate must lie in (0, 1], got {t3!r}")
    return legendre_transform((t1, t2), params, tau0) - math.log(t3)


def density_cone(x, n, params: PqParams, rp: RatePoint | None = None) -> float:
    """Leading-order density of ``S^(n)``: ``n/(2 pi) det(H_x)^{-1/2} exp(-n Lambda^*(x))``."""
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    rp = rp or solve_tau(x, params)
    return n / (2 * math.pi) * rp.det_hess ** -0.5 * math.exp(-n * rp.rate)


def density_ball(x, y, n, params: PqParams, rp: RatePoint | None = None) -> float:
    """Leading-order density of the empirical mean with the radial coordinate
    ``U^{1/n}`` appended; factorizes as ``density_cone(x) * n y^{n-1}``."""
    y = float(y)
    if not 0 < y <= 1:
        raise InvalidParameter(f"radial coordinate y must lie in (0, 1], got {y!r}")
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    rp = rp or solve_tau(x, params)
    log_d = 2 * math.log(n) - math.log(2 * math.pi) - math.log(y) - 0.5 * math.log(rp.det_hess) - n * (rp.rate - math.log(y))
    return math.exp(log_d)
