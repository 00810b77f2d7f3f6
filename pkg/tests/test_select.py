import json
import math

import numpy as np
import pytest

from penmin.collection import from_arrays
from penmin.exceptions import FullDf, FullDimension, NegativeSigma2, ValidationError
from penmin.jump import c_window
from penmin.path import compute_path
from penmin.regress import generate_problem, projection_stats
from penmin.select import (
    fpe_criterion,
    fpe_select,
    gcv_criterion,
    gcv_select,
    mallows_select,
    minimal_penalty_select,
)

ALL = dict(T=50, eta=0.1, D0=50, pct=0.15)


@pytest.fixture(scope="module")
def easy():
    return projection_stats(generate_problem("easy", 100, 0.25, 3))[1]


def test_window_composition(easy):
    out = minimal_penalty_select(easy, "window", eta=0.1)
    path = compute_path(easy)
    c = c_window(path, path.complexities(easy), 0.1).c_hat
    crit = easy.risk + 2 * c * easy.complexity / 100
    assert out.c_hat == c
    assert out.selected_id == easy.ids[int(np.argmin(crit))]


@pytest.mark.parametrize("method", ["max_jump", "threshold", "window", "slope", "capushe",
                                    "median", "consensus"])
def test_every_method_runs_and_serializes(easy, method):
    out = minimal_penalty_select(easy, method, **ALL)
    doc = json.loads(out.to_json())
    assert doc["method"] == method and doc["selected_id"] in easy.ids
    assert math.isfinite(out.c_hat) and out.c_hat > 0


@pytest.mark.parametrize("method", ["max_jump", "threshold", "window", "median", "consensus"])
def test_scale_equivariance(easy, method):
    # multiplying risks and penalties by k multiplies C by k and keeps the choice
    a = minimal_penalty_select(easy, method, **ALL)
    b = minimal_penalty_select(easy.scaled(4.0), method, **ALL)
    assert b.selected_id == a.selected_id
    assert b.c_hat == pytest.approx(a.c_hat, rel=1e-12)


def test_aliases(easy):
    assert minimal_penalty_select(easy, "maxjump").c_hat == minimal_penalty_select(easy, "max_jump").c_hat
    assert minimal_penalty_select(easy, "thr", T=50).method == "threshold"


@pytest.mark.parametrize("method,params", [
    ("threshold", {}), ("window", {}), ("slope", {}), ("capushe", {"pct": None}),
    ("consensus", {"T": 50, "eta": 0.1, "D0": 50}), ("median", {"pct": 0.15}),
])
def test_missing_params(easy, method, params):
    with pytest.raises(ValidationError):
        minimal_penalty_select(easy, method, **params)


def test_unknown_method(easy):
    with pytest.raises(ValidationError):
        minimal_penalty_select(easy, "bogus")


def test_threshold_degenerate_warns():
    c = from_arrays([0.3, 0.2, 0.1], [1 / 3, 2 / 3, 1.0], complexity=[1.0, 2.0, 3.0])
    with pytest.warns(RuntimeWarning):
        out = minimal_penalty_select(c, "threshold", T=5)
    assert out.c_hat == 0.0


def test_consensus_reports_agreement(easy):
    out = minimal_penalty_select(easy, "consensus", **ALL)
    models = out.diagnostics["models"]
    votes = list(models.values()).count(out.selected_id)
    assert out.diagnostics["agreed"] == (votes >= 3)


def test_mallows_zero_variance_is_risk_minimizer(easy):
    out = mallows_select(easy, 0.0)
    assert out.selected_id == easy.ids[int(np.argmin(easy.risk))]


def test_mallows_matches_formula(easy):
    out = mallows_select(easy, 0.25, overpen=1.12)
    crit = easy.risk + 1.12 * 0.25 * easy.pen1
    assert out.selected_id == easy.ids[int(np.argmin(crit))]


def test_mallows_negative_sigma2(easy):
    with pytest.raises(NegativeSigma2):
        mallows_select(easy, -1.0)


def test_fpe_examples():
    assert fpe_criterion(1.0, 2, 4) == 3.0
    assert fpe_criterion(0.7, 0, 10) == 0.7
    assert fpe_criterion(0.5, 50, 100) == 1.5
    with pytest.raises(FullDimension):
        fpe_criterion(1.0, 4, 4)


def test_gcv_examples():
    assert gcv_criterion(1.0, 2, 4) == 4.0
    assert gcv_criterion(0.7, 0, 10) == 0.7
    with pytest.raises(FullDf):
        gcv_criterion(1.0, 4, 4)


def test_fpe_gcv_close_for_small_dimension():
    assert gcv_criterion(1.0, 1, 1000) == pytest.approx(fpe_criterion(1.0, 1, 1000), rel=1e-5)


def test_fpe_increasing_in_D():
    vals = [fpe_criterion(1.0, D, 100) for D in range(100)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_fpe_gcv_select_skip_full_model(easy):
    for fn, crit in ((fpe_select, fpe_criterion), (gcv_select, gcv_criterion)):
        out = fn(easy, 100)
        assert out.diagnostics["skipped"] == 1 and math.isnan(out.c_hat)
        ok = easy.complexity < 100
        vals = [crit(r, d, 100) for r, d in zip(easy.risk[ok], easy.complexity[ok])]
        assert out.selected_id == np.asarray(easy.ids)[ok][int(np.argmin(vals))]
