import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from penmin.collection import from_arrays
from penmin.exceptions import DegenerateX, NonFinite, TooFewDimensions, TooFewPoints, ValidationError
from penmin.select import mallows_select
from penmin.slope import c_median, c_slope, capushe, consensus, huber_slope, ols_slope, theil_sen_slope


def projection_collection(risk):
    n = len(risk)
    D = np.arange(1, n + 1, dtype=float)
    return from_arrays(risk, D / n, 2 * D / n, D, ids=range(1, n + 1))


@pytest.mark.parametrize("pts,expected", [
    ([(0, 0), (1, 1), (2, 2)], 1.0),
    ([(0, 5), (1, 5), (2, 5)], 0.0),
    ([(0, 0), (1, 2), (2, 2)], 1.0),
])
def test_ols(pts, expected):
    assert ols_slope(pts) == pytest.approx(expected, abs=1e-15)


def test_ols_matches_polyfit():
    rng = np.random.default_rng(0)
    x, y = rng.random(20), rng.random(20)
    assert ols_slope(np.column_stack([x, y])) == pytest.approx(np.polyfit(x, y, 1)[0], rel=1e-12)


def test_ols_degenerate():
    with pytest.raises(DegenerateX):
        ols_slope([(1, 0), (1, 2)])
    with pytest.raises(TooFewPoints):
        ols_slope([(1, 0)])


def test_theil_sen_examples():
    assert theil_sen_slope([(0, 0), (1, 1), (2, 2)]) == 1.0
    assert theil_sen_slope([(0, 0), (1, 1), (2, 2), (3, 3), (4, 100)]) == 1.0
    assert theil_sen_slope([(1, 2), (3, 8)]) == 3.0


def test_theil_sen_even_count_midpoint():
    # six slopes 1, 1, 1, 2, 7/3, 5
    assert theil_sen_slope([(0, 0), (1, 1), (3, 3), (4, 8)]) == 1.5


def test_theil_sen_skips_equal_x():
    assert theil_sen_slope([(0, 0), (0, 5), (1, 1)]) == float(np.median([1.0, -4.0]))
    with pytest.raises(DegenerateX):
        theil_sen_slope([(2, 0), (2, 1)])


def test_theil_sen_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = rng.random(15), rng.random(15)
        ref = stats.theilslopes(y, x).slope
        assert theil_sen_slope(np.column_stack([x, y])) == pytest.approx(ref, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=15,
                unique_by=lambda p: p[0]),
       st.integers(1, 5), st.randoms(use_true_random=False))
def test_theil_sen_permutation_and_scale(pts, k, rnd):
    s = theil_sen_slope(pts)
    shuffled = list(pts)
    rnd.shuffle(shuffled)
    assert theil_sen_slope(shuffled) == s
    assert theil_sen_slope([(x, k * y) for x, y in pts]) == pytest.approx(k * s, rel=1e-12, abs=1e-12)


def test_huber_exact_line():
    assert huber_slope([(0, 1), (1, 3), (2, 5), (3, 7)]) == pytest.approx(2.0, rel=1e-14)


def test_huber_resists_outlier():
    x = np.arange(20.0)
    y = 0.5 * x
    y[-1] += 100
    assert abs(huber_slope(np.column_stack([x, y])) - 0.5) < 0.1
    assert abs(ols_slope(np.column_stack([x, y])) - 0.5) > 1


def test_huber_matches_statsmodels():
    sm = pytest.importorskip("statsmodels.api")
    # statsmodels normalizes the MAD by the exact normal quantile, not 0.6745
    t = 1.345 * stats.norm.ppf(0.75) / 0.6745
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = rng.random(30)
        y = 2 * x + rng.standard_t(2, 30)
        ref = sm.RLM(y, sm.add_constant(x), M=sm.robust.norms.HuberT(t)).fit(
            scale_est="mad", maxiter=1000, tol=1e-14, conv="coefs").params[1]
        assert huber_slope(np.column_stack([x, y]), maxit=1000, acc=1e-15) == pytest.approx(ref, rel=1e-10)


def test_c_slope_exact_line():
    c = projection_collection([0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0])
    fit = c_slope(c, 8, 10)
    assert fit.c_hat == pytest.approx(1.0, rel=1e-12)
    assert fit.n_points == 3 and fit.residual_sse == pytest.approx(0.0, abs=1e-25)


def test_c_slope_constant():
    c = projection_collection([0.5] * 10)
    assert c_slope(c, 1, 10).c_hat == 0.0


def test_c_slope_too_few():
    c = projection_collection([0.5] * 10)
    with pytest.raises(TooFewPoints):
        c_slope(c, 10, 10)


def test_capushe_linear_data():
    n, s2 = 20, 0.7
    risk = s2 * (n - np.arange(1, n + 1)) / n + 0.3
    c = projection_collection(risk)
    res = capushe(c, n, 0.15)
    assert res.c_hat == pytest.approx(s2, rel=1e-10)
    assert len(res.platforms) == 1
    assert sum(p.N for p in res.platforms) == n - 2
    assert res.selected_id == mallows_select(c, s2).selected_id
    assert json.loads(res.platforms_json())[0]["N"] == n - 2


def test_capushe_platforms_cover_range_and_pct_rule():
    rng = np.random.default_rng(2)
    n = 40
    for _ in range(20):
        D = np.arange(1, n + 1)
        risk = 0.25 * (n - D) / n + 0.5 / D + 0.02 * rng.standard_normal(n) ** 2
        c = projection_collection(risk)
        res = capushe(c, n, 0.15)
        sizes = [p.N for p in res.platforms]
        assert sum(sizes) == n - 2
        k = res.chosen_platform
        if res.fallback:
            assert sizes[k] == max(sizes) and sizes[k + 1:].count(max(sizes)) == 0
        else:
            assert sizes[k] > 0.15 * (n - 2)
            assert all(s <= 0.15 * (n - 2) for s in sizes[k + 1:])
        assert res.selected_id == res.platforms[k].model
        p = res.platforms[k]
        v = sorted(res.slopes[p.D_start - 1:p.D_start - 1 + p.N])
        assert res.c_hat == v[len(v) // 2]


def test_capushe_dedupes_dimensions():
    n = 10
    D = np.r_[np.arange(1, n + 1), [3.0]]
    risk = np.r_[(n - np.arange(1, n + 1)) / n, [5.0]]
    c = from_arrays(risk, D / n, 2 * D / n, D)
    res = capushe(c, n, 0.15)
    assert res.c_hat == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("regression", ["huber", "theil_sen"])
def test_capushe_regressions_agree_on_lines(regression):
    n = 30
    c = projection_collection(0.4 * (n - np.arange(1, n + 1)) / n)
    assert capushe(c, n, 0.15, regression=regression).c_hat == pytest.approx(0.4, rel=1e-10)


def test_capushe_bad_regression():
    with pytest.raises(ValidationError):
        capushe(projection_collection(np.linspace(1, 0, 10)), 10, 0.15, regression="lad")


def test_capushe_small_n():
    with pytest.raises(TooFewDimensions):
        capushe(projection_collection([0.3, 0.2, 0.1]), 3, 0.15)


def test_capushe_bad_pct():
    with pytest.raises(ValidationError):
        capushe(projection_collection(np.linspace(1, 0, 10)), 10, 1.5)


def test_median():
    assert c_median([1, 2, 3, 4, 5]) == 3
    assert c_median([5, 1, 4, 2, 3]) == 3


def test_median_errors():
    with pytest.raises(NonFinite):
        c_median([1, 2, np.nan, 4, 5])
    with pytest.raises(ValidationError):
        c_median([1, 2, 3])


def test_consensus():
    assert consensus(["A", "A", "A", "B", "C"], "W") == ("A", True)
    assert consensus(["A", "A", "B", "B", "C"], "W") == ("W", False)
    assert consensus([1, 2, 1, 2, 2], 9) == (2, True)
    with pytest.raises(ValidationError):
        consensus([1, 2], 3)
