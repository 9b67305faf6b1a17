import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmcnets import kernels
from qmcnets.discrepancy import (
    DiscrepancyParams,
    bernoulli_poly,
    newton_coefficients,
    projection_decomposition,
    rms_scaled_discrepancy,
    scale_constant,
    squared_discrepancy,
    squared_discrepancy_alpha2,
)
from qmcnets.engine import mc_sample
from qmcnets.errors import UnsupportedDegree

import oracles


def test_bernoulli_examples():
    assert bernoulli_poly(2, 0.0) == pytest.approx(1 / 6, abs=1e-16)
    assert bernoulli_poly(1, 0.5) == 0.0
    assert bernoulli_poly(4, 0.0) == pytest.approx(-1 / 30, abs=1e-16)
    with pytest.raises(UnsupportedDegree):
        bernoulli_poly(5, 0.3)


def test_bernoulli_integrals_vanish():
    y = (np.arange(200000) + 0.5) / 200000
    for i in range(1, 5):
        assert abs(np.mean(bernoulli_poly(i, y))) < 1e-9


def test_single_origin_point():
    rep = squared_discrepancy(np.zeros((1, 1)), DiscrepancyParams(2, 1.0))
    assert rep.d2 == pytest.approx(1 / 4 + 1 / 144 + 1 / 720, rel=1e-14)


def test_duplicate_points_do_not_change_d2():
    P = np.random.default_rng(0).random((5, 3))
    a = squared_discrepancy(P).d2
    b = squared_discrepancy(np.vstack([P, P])).d2
    assert b == pytest.approx(a, rel=1e-12)


@pytest.mark.parametrize("alpha", [1, 2])
@pytest.mark.parametrize("N,s", [(1, 1), (17, 2), (64, 2), (40, 5)])
def test_matches_brute_force(alpha, N, s):
    P = np.random.default_rng(N * 10 + s).random((N, s))
    for gamma in (0.3, 1.0):
        want = oracles.brute_d2(P.tolist(), alpha, gamma)
        got = squared_discrepancy(P, DiscrepancyParams(alpha, gamma)).d2
        assert got == pytest.approx(want, rel=1e-12)


def test_alpha2_literal_path_matches():
    P = np.random.default_rng(3).random((50, 4))
    assert squared_discrepancy_alpha2(P) == pytest.approx(squared_discrepancy(P).d2, rel=1e-12)


def test_fallback_and_compiled_agree():
    P = np.random.default_rng(4).random((70, 3))
    g = np.array([0.5, 1.0, 2.0])
    for alpha in (1, 2):
        a = kernels.pair_sums(P, alpha, g)
        b = kernels.fallback.pair_sums(P, alpha, g)
        assert np.allclose(a, b, rtol=1e-13, atol=0)


def test_thread_count_invariance():
    P = np.random.default_rng(5).random((300, 3))
    vals = {squared_discrepancy(P, threads=t).d2 for t in (1, 2, 4)}
    assert len(vals) == 1


def test_invariances():
    gen = np.random.default_rng(6)
    P = gen.random((30, 3))
    d = squared_discrepancy(P).d2
    assert squared_discrepancy(P[gen.permutation(30)]).d2 == pytest.approx(d, rel=1e-12)
    assert squared_discrepancy(P[:, [2, 0, 1]]).d2 == pytest.approx(d, rel=1e-12)


@given(st.integers(1, 30), st.integers(1, 4), st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_nonnegative(N, s, seed, alpha):
    P = np.random.default_rng(seed).random((N, s))
    assert squared_discrepancy(P, DiscrepancyParams(alpha, 1.0)).d2 >= -1e-9


def test_scale_constant_values():
    c1 = scale_constant(1)
    assert c1 == pytest.approx(1 / 12 + 1 / 720 + 1 / 720, rel=1e-14)
    assert scale_constant(2) == pytest.approx((1 + c1) ** 2 - 1, rel=1e-14)
    assert scale_constant(1, DiscrepancyParams(1, 1.0)) == pytest.approx(1 / 12 + 1 / 12, rel=1e-14)


@pytest.mark.parametrize("s,alpha", [(1, 2), (3, 2), (2, 1)])
def test_scale_constant_mc_oracle(s, alpha):
    params = DiscrepancyParams(alpha, 1.0)
    N = 32
    vals = [N * squared_discrepancy(mc_sample(N, s, r), params).d2 for r in range(2000)]
    assert np.mean(vals) == pytest.approx(scale_constant(s, params), rel=0.05)


def test_params_validation():
    with pytest.raises(UnsupportedDegree):
        DiscrepancyParams(3, 1.0)
    with pytest.raises(ValueError):
        DiscrepancyParams(2, 0.0)


def test_newton_coefficients_recover_polynomial():
    coef = np.array([0.0, 1.5, -2.0, 0.25])
    x = np.array([0.0, 1 / 3, 2 / 3, 1.0])
    y = np.polyval(coef[::-1], x)
    assert np.allclose(newton_coefficients(x, y), coef, atol=1e-12)


def test_decomposition_s1():
    P = np.random.default_rng(7).random((20, 1))
    (d1,) = projection_decomposition(P)
    assert d1 == pytest.approx(squared_discrepancy(P).d2, rel=1e-12)


@pytest.mark.parametrize("s", [2, 3, 5])
def test_decomposition_held_out(s):
    P = np.random.default_rng(s).random((40, s))
    coef = projection_decomposition(P)
    for g in (0.5, 0.7, 2.0):
        direct = squared_discrepancy(P, DiscrepancyParams(2, g)).d2
        recon = sum(c * g ** (j + 1) for j, c in enumerate(coef))
        assert recon == pytest.approx(direct, rel=1e-8)
    assert np.all(coef >= -1e-9)


def test_grid_has_smaller_first_order_term():
    n = 8
    g = (np.arange(n) + 0.5) / n
    grid = np.array([(a, c) for a in g for c in g])
    mc = mc_sample(n * n, 2, 1).points
    assert projection_decomposition(grid)[0] < projection_decomposition(mc)[0]


def test_report_fields():
    P = np.random.default_rng(8).random((10, 3))
    rep = squared_discrepancy(P, per_order=True)
    d = rep.to_dict()
    assert d["N"] == 10 and d["s"] == 3 and len(d["per_order"]) == 3
    assert math.isclose(sum(d["per_order"]), d["d2"], rel_tol=1e-9)
    assert d["d2_scaled"] == pytest.approx(d["d2"] / d["scale_constant"])


def test_rms_scaled_discrepancy_of_random_points():
    for s in (2, 5):
        N = 64
        rms = rms_scaled_discrepancy([mc_sample(N, s, r) for r in range(500)])
        assert 0.9 < rms * math.sqrt(N) < 1.1
