"""Seeded Monte Carlo estimates of the tail probabilities, intersection
volumes and projection tails.

Events are evaluated through the empirical moments
``S1 = mean |Y_i|^q`` and ``S2 = mean |Y_i|^p``: the rescaled q-norm of the
cone point ``Y / ||Y||_p`` is ``S1^{1/q} / S2^{1/p}``, and the uniform-ball
point multiplies it by ``U^{1/n}``.  Cone and ball estimates computed in one
call share their draws.

Two estimators are available.  ``"plain"`` counts hits under the base
measure.  ``"tilted"`` draws the coordinates from the exponentially tilted
density with the saddle-point tilt ``tau(z*)`` and reweights by the
likelihood ratio ``exp(-n <tau, S> + n Lambda_p(tau))``; it resolves
probabilities far below ``1 / n_samples``.

Samples are split into fixed-size chunks, each with its own substream
spawned from ``seed``; chunk results are merged in chunk order, so the output
depends only on the arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats.sampling import NumericalInversePolynomial

from .cgf import lambda_p
from .errors import InvalidParameter
from .gengauss import PqParams
from .sld import ball_constants, projection_params, rate_point, tail_ball, tail_cone

__all__ = [
    "McEstimate",
    "PairedEstimate",
    "mc_pair",
    "mc_tail_cone",
    "mc_tail_ball",
    "mc_intersection",
    "mc_projection",
    "compare",
    "CHUNK_ELEMENTS",
]

CHUNK_ELEMENTS = 1 << 22  # coordinates drawn per chunk
MIN_SAMPLES = 1000
METHODS = ("plain", "tilted")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    n_samples: int
    ci95_lo: float
    ci95_hi: float
    seed: int
    method: str = "plain"
    hits: int = 0

    @classmethod
    def from_moments(cls, mean, second, n_samples, seed, method, hits):
        """Build from the sample mean and mean square of the per-sample scores."""
        if method == "plain":
            p = hits / n_samples
            se = math.sqrt(p * (1.0 - p) / n_samples)
        else:
            p = mean
            var = max(second - mean * mean, 0.0) * n_samples / (n_samples - 1)
            se = math.sqrt(var / n_samples)
        return cls(
            p_hat=p,
            stderr=se,
            n_samples=n_samples,
            ci95_lo=min(max(p - 1.96 * se, 0.0), 1.0),
            ci95_hi=min(max(p + 1.96 * se, 0.0), 1.0),
            seed=seed,
            method=method,
            hits=hits,
        )

    def complement(self) -> "McEstimate":
        p = 1.0 - self.p_hat
        return McEstimate(
            p_hat=p,
            stderr=self.stderr,
            n_samples=self.n_samples,
            ci95_lo=min(max(p - 1.96 * self.stderr, 0.0), 1.0),
            ci95_hi=min(max(p + 1.96 * self.stderr, 0.0), 1.0),
            seed=self.seed,
            method=self.method,
            hits=self.n_samples - self.hits,
        )


@dataclass(frozen=True)
class PairedEstimate:
    """Cone and ball estimates from the same draws, with the ratio cone/ball."""

    cone: McEstimate
    ball: McEstimate
    ratio: float
    ratio_stderr: float


# --- validation -----------------------------------------------------------


def _check_common(n, n_samples, seed, method):
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    if int(n_samples) != n_samples or n_samples < MIN_SAMPLES:
        raise InvalidParameter(f"n_samples must be an integer >= {MIN_SAMPLES}, got {n_samples!r}")
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise InvalidParameter(f"seed must be a non-negative integer, got {seed!r}")
    if method not in METHODS:
        raise InvalidParameter(f"method must be one of {METHODS}, got {method!r}")
    return int(n), int(n_samples), int(seed)


def _chunks(n, n_samples):
    per = max(1, CHUNK_ELEMENTS // n)
    sizes = [per] * (n_samples // per)
    if n_samples % per:
        sizes.append(n_samples % per)
    return sizes


# --- tilted sampler -------------------------------------------------------


class _TiltedAbs:
    """Unnormalized density of ``|Y|`` under the tilt, for PINV setup."""

    def __init__(self, t1, t2, p, q):
        self.t1, self.c, self.p, self.q = t1, 1.0 - p * t2, p, q
        self.mode = (q * t1 / self.c) ** (1.0 / (p - q)) if t1 > 0 else 0.0
        self.e_max = self._expo(self.mode)

    def _expo(self, y):
        return self.t1 * y ** self.q - (self.c / self.p) * y ** self.p

    def pdf(self, y):
        return math.exp(self._expo(y) - self.e_max)


@lru_cache(maxsize=64)
def _pinv(t1, t2, p, q):
    dist = _TiltedAbs(t1, t2, p, q)
    center = dist.mode if dist.mode > 0 else 0.5
    return NumericalInversePolynomial(dist, domain=(0.0, math.inf), center=center, u_resolution=1e-12)


def _pow(a, r):
    if r == 1.0:
        return a
    if r == 2.0:
        return a * a
    return a ** r


# --- kernel -------------------------------------------------------------------


def _run(n, log_z, params, n_samples, seed, method, tilt_z, want_ball):
    """Cone and (optionally) ball scores for the event ``R > z``; one entry
    per level in ``log_z``.

    Returns per level ``(hits, sum, sum_sq)`` for cone and ball and the cross
    sum of cone and ball scores at the first level.
    """
    p, q = params.p, params.q
    log_z = np.atleast_1d(np.asarray(log_z, dtype=float))
    k = log_z.size
    if method == "tilted":
        rp = rate_point(tilt_z, params)
        t1, t2 = rp.tau.tau1, rp.tau.tau2
        sampler = _pinv(t1, t2, p, q)
        lam = lambda_p((t1, t2), params)
        # weights carried relative to exp(-n * rate) to stay O(1)
        shift = n * (lam + rp.rate)
    acc = {key: [[] for _ in range(k)] for key in ("ch", "cs", "cq", "bh", "bs", "bq")}
    cross = []
    sizes = _chunks(n, n_samples)
    for size, ss in zip(sizes, np.random.SeedSequence(seed).spawn(len(sizes))):
        rng = np.random.default_rng(ss)
        if method == "plain":
            a_p = rng.gamma(1.0 / p, p, size=(size, n))  # |Y|^p
            a_q = _pow(a_p, q / p)
        else:
            y = sampler.rvs(size=(size, n), random_state=rng)
            a_p = _pow(y, p)
            a_q = _pow(y, q)
        s1 = a_q.mean(axis=1)
        s2 = a_p.mean(axis=1)
        log_r = np.log(s1) / q - np.log(s2) / p
        if want_ball:
            log_rb = log_r + np.log(rng.random(size)) / n
        if method == "tilted":
            w = np.exp(shift - n * (t1 * s1 + t2 * s2))
        for j in range(k):
            hit = log_r > log_z[j]
            score = np.where(hit, w, 0.0) if method == "tilted" else hit.astype(float)
            acc["ch"][j].append(int(hit.sum()))
            acc["cs"][j].append(math.fsum(score))
            acc["cq"][j].append(math.fsum(score * score))
            if want_ball:
                hit_b = log_rb > log_z[j]
                score_b = np.where(hit_b, w, 0.0) if method == "tilted" else hit_b.astype(float)
                acc["bh"][j].append(int(hit_b.sum()))
                acc["bs"][j].append(math.fsum(score_b))
                acc["bq"][j].append(math.fsum(score_b * score_b))
                if j == 0:
                    cross.append(math.fsum(score * score_b))
    scale = math.exp(-n * rp.rate) if method == "tilted" else 1.0
    out = []
    for j in range(k):
        row = {}
        for tag in ("c", "b") if want_ball else ("c",):
            hits = sum(acc[tag + "h"][j])
            mean = math.fsum(acc[tag + "s"][j]) / n_samples
            second = math.fsum(acc[tag + "q"][j]) / n_samples
            row[tag] = (hits, mean * scale, second * scale * scale)
        out.append(row)
    cross_mean = math.fsum(cross) / n_samples * scale * scale if want_ball else None
    return out, cross_mean


def _tilt_level(z, params, method):
    if method != "tilted":
        return None
    if not params.m < z < 1.0:
        raise InvalidParameter(f"tilted sampling needs m_(p,q) < z < 1, got z={z!r}")
    return float(z)


def _log_level(z):
    z = float(z)
    if not math.isfinite(z) or z < 0:
        raise InvalidParameter(f"deviation level must be finite and >= 0, got {z!r}")
    return math.log(z) if z > 0 else -math.inf


def mc_pair(n, z, params: PqParams, n_samples, seed, method="plain") -> PairedEstimate:
    """Cone and uniform-ball tail estimates on common draws."""
    n, n_samples, seed = _check_common(n, n_samples, seed, method)
    tz = _tilt_level(z, params, method)
    (row,), cross = _run(n, _log_level(z), params, n_samples, seed, method, tz, True)
    cone = McEstimate.from_moments(*row["c"][1:], n_samples, seed, method, row["c"][0])
    ball = McEstimate.from_moments(*row["b"][1:], n_samples, seed, method, row["b"][0])
    if ball.p_hat > 0 and cone.p_hat > 0:
        ratio = cone.p_hat / ball.p_hat
        # delta method on the paired means
        vc = cone.stderr ** 2
        vb = ball.stderr ** 2
        cov = (cross - cone.p_hat * ball.p_hat) / (n_samples - 1)
        rel2 = vc / cone.p_hat ** 2 + vb / ball.p_hat ** 2 - 2.0 * cov / (cone.p_hat * ball.p_hat)
        ratio_se = ratio * math.sqrt(max(rel2, 0.0))
    else:
        ratio, ratio_se = math.nan, math.nan
    return PairedEstimate(cone, ball, ratio, ratio_se)


def mc_tail_cone(n, z, params: PqParams, n_samples, seed, method="plain") -> McEstimate:
    """Estimate ``P(n^{1/p-1/q} ||Z||_q > z)`` for Z cone-distributed on the l_p^n sphere."""
    n, n_samples, seed = _check_common(n, n_samples, seed, method)
    tz = _tilt_level(z, params, method)
    (row,), _ = _run(n, _log_level(z), params, n_samples, seed, method, tz, False)
    return McEstimate.from_moments(*row["c"][1:], n_samples, seed, method, row["c"][0])


def mc_tail_cone_grid(n, zs, params: PqParams, n_samples, seed) -> list[McEstimate]:
    """Plain estimates at several levels on common draws; nonincreasing in z."""
    n, n_samples, seed = _check_common(n, n_samples, seed, "plain")
    rows, _ = _run(n, [_log_level(z) for z in zs], params, n_samples, seed, "plain", None, False)
    return [McEstimate.from_moments(*r["c"][1:], n_samples, seed, "plain", r["c"][0]) for r in rows]


def mc_tail_ball(n, z, params: PqParams, n_samples, seed, method="plain") -> McEstimate:
    """Estimate ``P(n^{1/p-1/q} ||Z||_q > z)`` for Z uniform in the l_p^n ball."""
    return mc_pair(n, z, params, n_samples, seed, method).ball


def mc_intersection(n, t, params: PqParams, n_samples, seed, method="plain") -> McEstimate:
    """Estimate ``vol_n(D_p^n cap t D_q^n)``, the fraction of uniform-ball points
    with rescaled q-norm at most ``t c_{n,p,q}``."""
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise InvalidParameter(f"t must be finite and positive, got {t!r}")
    z_eff = t * ball_constants(n, params).c_npq
    return mc_tail_ball(n, z_eff, params, n_samples, seed, method).complement()


def mc_projection(n, q_proj, z, n_samples, seed, method="plain") -> McEstimate:
    """Estimate ``P(n^{1/2-1/q} vol_1(P_theta B_q^n) > z)`` for theta cone-distributed
    on the Euclidean sphere, using ``vol_1(P_theta B_q^n) = 2 ||theta||_{q*}``."""
    params = projection_params(q_proj)
    return mc_tail_cone(n, float(z) / 2.0, params, n_samples, seed, method)


def compare(n, z, params: PqParams, n_samples, seed, method="tilted") -> dict:
    """Analytic estimates next to Monte Carlo on common draws; ratios are analytic/MC."""
    sc, sb = tail_cone(n, z, params), tail_ball(n, z, params)
    pair = mc_pair(n, z, params, n_samples, seed, method)

    def ratio(a, b):
        return a / b if b > 0 else math.nan

    return {
        "n": int(n),
        "z": float(z),
        "sld_cone": sc,
        "sld_ball": sb,
        "mc_cone": pair.cone,
        "mc_ball": pair.ball,
        "ratio_cone": ratio(sc.probability, pair.cone.p_hat),
        "ratio_ball": ratio(sb.probability, pair.ball.p_hat),
        "mc_cone_over_ball": pair.ratio,
        "mc_cone_over_ball_stderr": pair.ratio_stderr,
        "prefactor_ratio": sc.prefactor / sb.prefactor,
    }
