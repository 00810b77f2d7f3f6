import math

import numpy as np
import pytest

from penmin.exceptions import AsymmetricM, BadRange, FullDimension, TooShort
from penmin.varbounds import (
    prop2_bounds,
    residual_moments,
    residual_mse_gaussian,
    risksmall,
    sigma2_residual,
    sigma2_rice,
    theorem1_envelope,
    var_quadratic_form,
)


def test_residual_examples():
    assert sigma2_residual([1, 1, 1, 1], 4.0, 0, 4).value == 1.0
    assert sigma2_residual(None, 0.0, 3, 10).value == 0.0
    assert sigma2_residual(None, 6.0, 2, 8).value == 1.0
    with pytest.raises(FullDimension):
        sigma2_residual(None, 1.0, 4, 4)


def test_residual_monotone():
    vals = [sigma2_residual(None, r, 5, 20).value for r in np.linspace(0, 10, 11)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_rice_examples():
    assert sigma2_rice([0, 1, 0, 1]).value == 0.5
    assert sigma2_rice([3.0] * 7).value == 0.0
    with pytest.raises(TooShort):
        sigma2_rice([1.0])


def test_rice_unbiased_under_constant_signal():
    rng = np.random.default_rng(0)
    Y = 2.0 + 0.7 * rng.standard_normal((10_000, 50))
    d = np.diff(Y, axis=1)
    est = np.sum(d * d, axis=1) / (2 * 49)
    assert est[0] == pytest.approx(sigma2_rice(Y[0]).value, rel=1e-12)
    assert abs(est.mean() - 0.49) < 3 * est.std(ddof=1) / 100


def test_residual_mse_examples():
    bias, var, mse = residual_mse_gaussian(102, 2, 1.0, 0.0)
    assert bias == 0 and mse == pytest.approx(0.02, rel=1e-15)
    assert residual_mse_gaussian(50, 0, 2.0, 0.0)[2] == pytest.approx(2 * 4 / 50)


def test_var_quadratic_form_examples():
    n, s2 = 6, 0.5
    assert var_quadratic_form(np.eye(n), np.zeros(n), s2, 0.0, 3 * s2**2) == pytest.approx(2 * n * s2**2)
    assert var_quadratic_form(np.zeros((n, n)), np.ones(n), s2, 0.3, 1.0) == 0.0
    with pytest.raises(AsymmetricM):
        var_quadratic_form(np.triu(np.ones((3, 3))), np.zeros(3), 1.0, 0.0, 3.0)


def test_var_quadratic_form_gaussian_reduction():
    rng = np.random.default_rng(1)
    B = rng.standard_normal((5, 5))
    M = B + B.T
    s2 = 0.8
    # with Gaussian moments and F = 0 only 2 tr(M^2) sigma^4 remains
    assert var_quadratic_form(M, np.zeros(5), s2, 0.0, 3 * s2**2) == pytest.approx(
        2 * np.trace(M @ M) * s2**2, rel=1e-12)


def test_residual_moments_match_gaussian_formula():
    n, D, s2 = 30, 10, 0.25
    F = np.arange(1.0, n + 1) ** -1
    P = np.diag((np.arange(n) < D).astype(float))
    b2 = float(np.sum(F[D:] ** 2))
    mean, var, mse = residual_moments(P, F, s2)
    bias, var2, mse2 = residual_mse_gaussian(n, D, s2, b2)
    assert mean - s2 == pytest.approx(bias, rel=1e-12)
    assert var == pytest.approx(var2, rel=1e-12) and mse == pytest.approx(mse2, rel=1e-12)


def test_residual_moments_monte_carlo_skewed_noise():
    # centred exponential noise: sigma2 = 1, m3 = 2, m4 = 9
    rng = np.random.default_rng(2)
    n, D = 8, 3
    F = rng.standard_normal(n)
    P = np.diag((np.arange(n) < D).astype(float))
    E = rng.exponential(size=(200_000, n)) - 1.0
    r = (F + E) @ (np.eye(n) - P).T
    est = np.sum(r * r, axis=1) / (n - D)
    mean, var, _ = residual_moments(P, F, 1.0, m3=2.0, m4=9.0)
    R = est.size
    assert abs(est.mean() - mean) < 3 * est.std() / math.sqrt(R)
    assert abs(est.var() - var) < 3 * np.std((est - est.mean()) ** 2) / math.sqrt(R)


def test_prop2_collapses_at_zero_deviation():
    b = prop2_bounds(0.0, 100, 50, 10, 0.0, 0.7)
    assert b.c1 == 0.7 and b.c2 == 0.7


def test_prop2_pessimistic_lower_bound():
    b = prop2_bounds(math.log(100), 100, 50, 10, 0.0, 1.0)
    assert b.c1 == pytest.approx(1 - (0.8584 + 0.2763) / 0.5, abs=2e-3)
    assert b.c1 < 0


def test_prop2_upper_bound_diverges():
    c2 = [prop2_bounds(1.0, 100, 50, c, 0.01, 1.0).c2 for c in (0, 25, 45, 49, 49.9, 49.999)]
    assert all(a < b for a, b in zip(c2, c2[1:])) and c2[-1] > 1e4


def test_prop2_brackets_sigma2():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(10, 1000))
        T = rng.uniform(1, n - 1)
        b = prop2_bounds(rng.uniform(0, 20), n, T, rng.uniform(0, T * 0.99), rng.uniform(0, 1), 0.5)
        assert b.c1 <= 0.5 <= b.c2


def test_prop2_mse_bounds():
    b = prop2_bounds(1.0, 100, 50, 10, 0.0, 1.0, B_half_T=0.01, card_M=100)
    assert b.mse_bound > b.mse_bound_relaxed > 0
    small = prop2_bounds(1.0, 100, 50, 10, 0.0, 1.0, B_half_T=0.01, card_M=99)
    assert math.isnan(small.mse_bound_relaxed) and math.isfinite(small.mse_bound)
    assert math.isnan(prop2_bounds(1.0, 100, 50, 10, 0.0, 1.0).mse_bound)


@pytest.mark.parametrize("args", [(1.0, 100, 50, 50, 0.0, 1.0), (1.0, 100, 100, 0, 0.0, 1.0),
                                  (-1.0, 100, 50, 0, 0.0, 1.0)])
def test_prop2_bad_range(args):
    with pytest.raises(BadRange):
        prop2_bounds(*args)


def test_risksmall():
    assert risksmall(3) == 27 and risksmall(2) == 8
    assert risksmall(1.5) == 10 / 0.5**4
    assert risksmall(1.0) == math.inf


def test_theorem1_envelope():
    em, ep, f = theorem1_envelope(2, 100, 0.0, 1.0)
    assert em == pytest.approx(12.44, abs=5e-3)
    assert ep == pytest.approx(82 / 41 * em, rel=1e-12)
    assert f(3) == 27
