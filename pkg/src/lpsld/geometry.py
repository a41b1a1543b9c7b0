"""Curvature of planar curves and the two Weingarten maps used by the
sharp-asymptotics prefactor for the cone measure.

In the plane the Weingarten map of a curve at a point is the absolute value
of its curvature there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateTilt, ZeroGradient
from .gengauss import PqParams

__all__ = [
    "CurveJet2",
    "implicit_curvature",
    "graph_curvature",
    "weingarten_LD",
    "weingarten_LD_as_published",
    "weingarten_LLambda",
    "boundary_graph_derivatives",
]


@dataclass(frozen=True)
class CurveJet2:
    """First and second partial derivatives of ``F`` at a point of ``{F = 0}``."""

    f10: float
    f01: float
    f20: float
    f11: float
    f02: float

    def scaled(self, c: float) -> "CurveJet2":
        return CurveJet2(c * self.f10, c * self.f01, c * self.f20, c * self.f11, c * self.f02)


def implicit_curvature(jet: CurveJet2) -> float:
    """Signed curvature of the zero set of ``F``:

    ``(F01^2 F20 - 2 F01 F10 F11 + F10^2 F02) / (F10^2 + F01^2)^{3/2}``.
    """
    g2 = jet.f10 ** 2 + jet.f01 ** 2
    if g2 == 0.0:
        raise ZeroGradient("curvature of an implicit curve needs a nonzero gradient")
    num = jet.f01 ** 2 * jet.f20 - 2.0 * jet.f01 * jet.f10 * jet.f11 + jet.f10 ** 2 * jet.f02
    return num / g2 ** 1.5


def graph_curvature(fprime: float, fsecond: float) -> float:
    """Curvature of the graph of ``f`` given ``f'`` and ``f''`` at the point."""
    return abs(fsecond) / (1.0 + fprime ** 2) ** 1.5


def boundary_graph_derivatives(z: float, params: PqParams):
    """``f'`` and ``f''`` of ``f(t) = z^{-p} t^{p/q}`` at ``t = z^q``; the graph of
    ``f`` is the boundary ``{t1^{1/q} t2^{-1/p} = z}``."""
    p, q = params.p, params.q
    a = p / q
    t = z ** q
    f1 = a * z ** -p * t ** (a - 1.0)
    f2 = a * (a - 1.0) * z ** -p * t ** (a - 2.0)
    return f1, f2


def weingarten_LD(z: float, params: PqParams) -> float:
    """Curvature of the deviation-area boundary at ``z* = (z^q, 1)``:
    ``|p (p - q) z^q / q^2| / (z^{2q} + p^2/q^2)^{3/2}``.

    This is the graph curvature of ``f(t) = z^{-p} t^{p/q}``; the form with
    ``p q (p - q)`` in the numerator (:func:`weingarten_LD_as_published`)
    agrees only when ``q = 1``.
    """
    p, q = params.p, params.q
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    zq = z ** q
    return abs(p * (p - q) * zq / (q * q)) / (zq * zq + (p / q) ** 2) ** 1.5


def weingarten_LD_as_published(z: float, params: PqParams) -> float:
    """``|p q (p - q) z^q| / (z^{2q} + p^2/q^2)^{3/2}``."""
    p, q = params.p, params.q
    zq = z ** q
    return abs(p * q * (p - q) * zq) / (zq * zq + (p / q) ** 2) ** 1.5


def weingarten_LLambda(rp) -> float:
    """Curvature of the level set ``{Lambda^* = Lambda^*(x)}`` through ``rp.x``.

    The gradient of the rate is the tilt and its Hessian is ``H_x^{-1}``, so
    this is the implicit-curve formula with that jet.
    """
    t1, t2 = rp.tau.tau1, rp.tau.tau2
    if t1 == 0.0 and t2 == 0.0:
        raise DegenerateTilt("level-set curvature undefined at the mean (tau = 0)")
    hi = rp.hess_inv
    num = t2 ** 2 * hi[0, 0] - 2.0 * t1 * t2 * hi[0, 1] + t1 ** 2 * hi[1, 1]
    return abs(num) / (t1 ** 2 + t2 ** 2) ** 1.5
