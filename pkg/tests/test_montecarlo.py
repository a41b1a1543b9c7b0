import math

import numpy as np
import pytest

from lpsld import montecarlo as mc
from lpsld import sld
from lpsld.errors import InvalidParameter
from lpsld.gengauss import PqParams

P21 = PqParams(2, 1)


def exact_circle_tail(z):
    """n = 2, p = 2, q = 1: the rescaled 1-norm of a uniform point on the circle is
    cos(psi) with psi uniform on [-pi/4, pi/4]."""
    if z <= math.cos(math.pi / 4):
        return 1.0
    return 4 * math.acos(z) / math.pi


def test_trivial_levels():
    assert mc.mc_tail_cone(10, 0.0, P21, 1000, 1).p_hat == 1.0
    assert mc.mc_tail_ball(10, 0.0, P21, 1000, 1).p_hat == 1.0
    assert mc.mc_tail_cone(10, 10.0, P21, 1000, 1).p_hat == 0.0


def test_plain_against_exact():
    for z in (0.75, 0.9, 0.97):
        e = mc.mc_tail_cone(2, z, P21, 100_000, 11)
        assert abs(e.p_hat - exact_circle_tail(z)) < 4 * e.stderr


def test_tilted_against_exact():
    e = mc.mc_tail_cone(2, 0.9, P21, 100_000, 12, method="tilted")
    assert abs(e.p_hat - exact_circle_tail(0.9)) < 4 * e.stderr


def test_ball_against_exact():
    # P(U^{1/2} cos(psi) > z) = E[1 - (z / cos psi)^2]^+
    z = 0.8
    psi = np.linspace(0, math.pi / 4, 200_001)
    integrand = np.clip(1 - (z / np.cos(psi)) ** 2, 0, None)
    ref = np.trapezoid(integrand, psi) / (math.pi / 4)
    e = mc.mc_tail_ball(2, z, P21, 100_000, 3)
    assert abs(e.p_hat - ref) < 4 * e.stderr


@pytest.mark.parametrize("params,z", [(P21, 0.88), (PqParams(3, 2), 0.93)], ids=["21", "32"])
def test_tilted_agrees_with_plain(params, z):
    a = mc.mc_pair(20, z, params, 100_000, 4)
    b = mc.mc_pair(20, z, params, 100_000, 5, method="tilted")
    for x, y in ((a.cone, b.cone), (a.ball, b.ball)):
        assert abs(x.p_hat - y.p_hat) < 4 * math.hypot(x.stderr, y.stderr)


def test_deterministic():
    a = mc.mc_pair(30, 0.9, P21, 5000, 99, method="tilted")
    b = mc.mc_pair(30, 0.9, P21, 5000, 99, method="tilted")
    assert a == b
    assert mc.mc_tail_cone(30, 0.85, P21, 5000, 99) == mc.mc_tail_cone(30, 0.85, P21, 5000, 99)
    assert mc.mc_tail_cone(30, 0.85, P21, 5000, 99) != mc.mc_tail_cone(30, 0.85, P21, 5000, 98)


def test_chunking_is_scheduler_free(monkeypatch):
    monkeypatch.setattr(mc, "CHUNK_ELEMENTS", 1000)
    a = mc.mc_tail_cone(10, 0.85, P21, 5000, 1)
    b = mc.mc_tail_cone(10, 0.85, P21, 5000, 1)
    assert a == b and len(mc._chunks(10, 5000)) == 50


def test_ball_below_cone_on_common_draws():
    for method in ("plain", "tilted"):
        pair = mc.mc_pair(40, 0.88, P21, 20_000, 7, method=method)
        assert pair.ball.hits <= pair.cone.hits
        assert pair.ball.p_hat <= pair.cone.p_hat


def test_stderr_and_interval():
    e = mc.mc_tail_cone(10, 0.85, P21, 4000, 2)
    assert e.stderr == pytest.approx(math.sqrt(e.p_hat * (1 - e.p_hat) / e.n_samples), rel=1e-15)
    assert e.ci95_lo == pytest.approx(max(e.p_hat - 1.96 * e.stderr, 0.0))
    assert e.ci95_hi == pytest.approx(min(e.p_hat + 1.96 * e.stderr, 1.0))
    full = mc.mc_tail_cone(10, 0.0, P21, 4000, 2)
    assert full.ci95_hi == 1.0 and full.stderr == 0.0


def test_stderr_shrinks_with_samples():
    a = mc.mc_tail_cone(10, 0.85, P21, 10_000, 3)
    b = mc.mc_tail_cone(10, 0.85, P21, 40_000, 4)
    assert b.stderr / a.stderr == pytest.approx(0.5, rel=0.2)


def test_monotone_in_z_with_common_draws():
    zs = np.linspace(0.7, 0.99, 15)
    ests = mc.mc_tail_cone_grid(15, zs, P21, 20_000, 8)
    hits = [e.hits for e in ests]
    assert all(a >= b for a, b in zip(hits, hits[1:]))
    # same draws as the single-level call
    assert ests[3] == mc.mc_tail_cone(15, zs[3], P21, 20_000, 8)


def test_confidence_interval_coverage():
    n, z, k = 10, 0.85, 2000
    runs = [mc.mc_tail_cone(n, z, P21, k, seed) for seed in range(100)]
    pooled = np.mean([r.p_hat for r in runs])
    covered = sum(r.ci95_lo <= pooled <= r.ci95_hi for r in runs)
    assert covered >= 90


def test_projection_is_cone_tail():
    for q_proj in (4.0, math.inf):
        q_star = sld.conjugate_exponent(q_proj)
        a = mc.mc_projection(50, q_proj, 1.85, 5000, 21)
        b = mc.mc_tail_cone(50, 1.85 / 2, PqParams(2, q_star), 5000, 21)
        assert a.hits == b.hits and a == b
    with pytest.raises(InvalidParameter):
        mc.mc_projection(50, 2.0, 1.9, 5000, 1)


def test_intersection_extremes_and_complement():
    n = 20
    assert mc.mc_intersection(n, 100.0, P21, 2000, 1).p_hat == 1.0
    assert mc.mc_intersection(n, 1e-3, P21, 2000, 1).p_hat == 0.0
    t = 1.0
    z_eff = t * sld.ball_constants(n, P21).c_npq
    a = mc.mc_intersection(n, t, P21, 5000, 6)
    b = mc.mc_tail_ball(n, z_eff, P21, 5000, 6)
    assert a.p_hat == pytest.approx(1 - b.p_hat, abs=1e-15)
    with pytest.raises(InvalidParameter):
        mc.mc_intersection(n, -1.0, P21, 5000, 6)


def test_validation():
    with pytest.raises(InvalidParameter):
        mc.mc_tail_cone(10, 0.9, P21, 10, 1)
    with pytest.raises(InvalidParameter):
        mc.mc_tail_cone(10, 0.9, P21, 1000, -1)
    with pytest.raises(InvalidParameter):
        mc.mc_tail_cone(10, 0.9, P21, 1000, 1, method="magic")
    with pytest.raises(InvalidParameter):
        mc.mc_tail_cone(10, 0.5, P21, 1000, 1, method="tilted")
    with pytest.raises(InvalidParameter):
        mc.mc_tail_cone(0, 0.9, P21, 1000, 1)


def test_compare_record():
    r = mc.compare(60, 0.9, P21, 20_000, 5)
    assert r["ratio_cone"] == pytest.approx(r["sld_cone"].probability / r["mc_cone"].p_hat)
    assert r["prefactor_ratio"] == pytest.approx(sld.gamma(0.9, P21) / (sld.kappa(0.9, P21) * sld.xi(0.9, P21)))
    assert 0.5 < r["ratio_cone"] < 2 and 0.5 < r["ratio_ball"] < 2
