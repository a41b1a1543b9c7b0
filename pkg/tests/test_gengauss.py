import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpsld.errors import InvalidParameter
from lpsld.gengauss import (
    PqParams,
    density_fp,
    lp_norm,
    m_pq,
    make_rng,
    moment_Mp,
    sample_abs_pow,
    sample_ball,
    sample_cone,
    sample_np,
    substreams,
)


def test_density_p2_is_standard_normal():
    y = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(density_fp(y, 2), np.exp(-y ** 2 / 2) / math.sqrt(2 * math.pi), rtol=1e-14)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 7.5])
def test_density_integrates_to_one(p):
    total = mp.quad(lambda y: mp.exp(-abs(y) ** p / p), [-mp.inf, 0, mp.inf])
    assert float(total) * density_fp(0.0, p) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("p,r", [(2, 1), (2, 2), (3, 1.5), (1.5, 1), (4, 2.5), (1, 3)])
def test_moment_matches_quadrature(p, r):
    c = density_fp(0.0, p)
    ref = 2 * c * mp.quad(lambda y: y ** r * mp.exp(-y ** p / p), [0, mp.inf])
    assert moment_Mp(p, r) == pytest.approx(float(ref), rel=1e-12)


def test_known_moments():
    assert moment_Mp(2, 1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)
    assert moment_Mp(2, 2) == pytest.approx(1.0, rel=1e-15)
    # E|X|^p = 1 for every p
    for p in (1.2, 3.0, 6.0):
        assert moment_Mp(p, p) == pytest.approx(1.0, rel=1e-14)


def test_m_pq_below_one():
    for p, q in [(2, 1), (3, 2), (4, 2.5), (1.5, 1)]:
        assert 0 < m_pq(p, q) < 1


def test_params_validation():
    for p, q in [(1, 2), (2, 2), (2, 0.5), (math.inf, 1), ("a", 1)]:
        with pytest.raises(InvalidParameter):
            PqParams(p, q)
    with pytest.raises(InvalidParameter):
        moment_Mp(2, -1)


def test_lp_norm():
    assert lp_norm([3, 4], 2) == pytest.approx(5.0)
    assert lp_norm([3, -4], math.inf) == 4.0
    assert lp_norm([0, 0], 3) == 0.0
    # no overflow for huge entries
    assert lp_norm([1e300, 1e300], 2) == pytest.approx(math.sqrt(2) * 1e300)
    with pytest.raises(InvalidParameter):
        lp_norm([1, 2], 0.5)


def test_empirical_moment_within_three_se():
    rng = make_rng(2024)
    x = np.abs(sample_np(2, rng, 10 ** 6))
    se = x.std() / 1e3
    assert abs(x.mean() - moment_Mp(2, 1)) < 3 * se


def test_abs_pow_is_gamma():
    rng = make_rng(5)
    a = sample_abs_pow(3.0, rng, 200_000)
    # Gamma(1/3, scale 3): mean 1, variance 3
    assert a.mean() == pytest.approx(1.0, abs=4 * math.sqrt(3 / 2e5))


def test_cone_and_ball_samples():
    rng = make_rng(1)
    for p in (1.0, 2.0, 3.5):
        v = sample_cone(50, p, rng)
        assert v.norm() == pytest.approx(1.0, rel=1e-13)
        b = sample_ball(50, p, rng)
        assert b.norm() <= 1.0
    with pytest.raises(InvalidParameter):
        sample_cone(0, 2, rng)


def test_ball_radius_distribution():
    # ||Z||_p = U^{1/n} for the uniform measure
    rng = make_rng(9)
    n = 3
    r = np.array([sample_ball(n, 1.5, rng).norm() for _ in range(4000)])
    assert np.mean(r ** n) == pytest.approx(0.5, abs=4 * math.sqrt(1 / 12 / 4000))


def test_streams_deterministic():
    a = [g.random(3) for g in substreams(7, 3)]
    b = [g.random(3) for g in substreams(7, 3)]
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    assert not np.array_equal(a[0], a[1])


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=8),
    st.floats(1.0, 8.0),
    st.floats(0.01, 100.0),
)
def test_lp_norm_homogeneous(xs, p, c):
    x = np.array(xs)
    assert lp_norm(c * x, p) == pytest.approx(c * lp_norm(x, p), rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.01, 8.0), st.floats(0.0, 1.0))
def test_lp_norm_monotone_in_p(p, frac):
    # ||x||_p is nonincreasing in p
    x = np.array([0.3, -1.2, 2.0, 0.01])
    q = 1.0 + frac * (p - 1.0)
    assert lp_norm(x, p) <= lp_norm(x, q) * (1 + 1e-13)
