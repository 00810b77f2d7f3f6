"""End-to-end model selection.

:func:`minimal_penalty_select` estimates the minimal-penalty constant ``C``
from ``(risk, pen0, complexity)`` with one of the calibrators, then picks the
minimizer of ``risk + C * pen1``.  The factor between minimal and optimal
penalty lives in the data (``pen1``), not in the code.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .collection import Collection, penalized_argmin
from .exceptions import FullDf, FullDimension, NegativeSigma2, ValidationError
from .jump import c_max_jump, c_threshold, c_window
from .path import compute_path
from .slope import c_median, c_slope, capushe, consensus

METHODS = ("max_jump", "threshold", "window", "slope", "capushe", "median", "consensus")
_ALIASES = {"maxjump": "max_jump", "thr": "threshold", "win": "window"}
# parameters each calibrator needs; n is optional everywhere
_REQUIRED = {
    "max_jump": (),
    "threshold": ("T",),
    "window": ("eta",),
    "slope": ("D0",),
    "capushe": ("pct",),
    "median": ("T", "eta", "D0", "pct"),
    "consensus": ("T", "eta", "D0", "pct"),
}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else None)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return _jsonable(float(v))
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass(frozen=True)
class SelectionOutcome:
    selected_id: object
    c_hat: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable({"selected_id": self.selected_id, "c_hat": self.c_hat,
                          "method": self.method, "diagnostics": self.diagnostics})

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _normalize_method(method):
    m = _ALIASES.get(method, method)
    if m not in METHODS:
        raise ValidationError(f"unknown method {method!r}")
    return m


def _select_with(collection, c_hat):
    return collection.ids[penalized_argmin(collection, c_hat, "pen1")]


def _five(collection, path, comp, params, n):
    """Constants and selected models of the five base calibrators."""
    c_mj = c_max_jump(path, comp)
    c_thr = _threshold(path, comp, params["T"])
    c_win = c_window(path, comp, params["eta"])
    c_sl = c_slope(collection, params["D0"], n)
    cap = capushe(collection, n, params["pct"])
    c = {"max_jump": c_mj.c_hat, "threshold": c_thr.c_hat, "window": c_win.c_hat,
         "slope": c_sl.c_hat, "capushe": cap.c_hat}
    models = {k: _select_with(collection, v) for k, v in c.items() if k != "capushe"}
    models["capushe"] = cap.selected_id
    return c, models


def _threshold(path, comp, T):
    res = c_threshold(path, comp, T)
    if res.c_hat == 0.0:
        warnings.warn("no complexity exceeds T; threshold calibration degenerates to C = 0",
                      RuntimeWarning, stacklevel=3)
    return res


def minimal_penalty_select(collection: Collection, method: str, **params) -> SelectionOutcome:
    """Calibrate ``C`` with ``method`` and select ``argmin risk + C * pen1``.

    Parameters by method: ``threshold`` needs ``T``, ``window`` needs
    ``eta``, ``slope`` needs ``D0``, ``capushe`` needs ``pct``; ``median``
    and ``consensus`` need all four.  ``n`` (sample size) defaults to the
    largest complexity in the collection.
    """
    method = _normalize_method(method)
    missing = [p for p in _REQUIRED[method] if params.get(p) is None]
    if missing:
        raise ValidationError(f"method {method!r} needs parameter(s) {', '.join(missing)}")
    n = params.get("n")
    if n is None:
        n = int(round(collection.complexity.max()))

    if method in ("slope", "capushe"):
        path = comp = None
    else:
        path = compute_path(collection)
        comp = path.complexities(collection)

    if method == "max_jump":
        d = c_max_jump(path, comp)
        return SelectionOutcome(_select_with(collection, d.c_hat), d.c_hat, method, d.to_dict())
    if method == "threshold":
        d = _threshold(path, comp, params["T"])
        return SelectionOutcome(_select_with(collection, d.c_hat), d.c_hat, method, d.to_dict())
    if method == "window":
        d = c_window(path, comp, params["eta"])
        return SelectionOutcome(_select_with(collection, d.c_hat), d.c_hat, method, d.to_dict())
    if method == "slope":
        fit = c_slope(collection, params["D0"], n)
        diag = {"n_points": fit.n_points, "residual_sse": fit.residual_sse}
        return SelectionOutcome(_select_with(collection, fit.c_hat), fit.c_hat, method, diag)
    if method == "capushe":
        res = capushe(collection, n, params["pct"])
        diag = {"platforms": json.loads(res.platforms_json()),
                "chosen_platform": res.chosen_platform, "fallback": res.fallback}
        return SelectionOutcome(res.selected_id, res.c_hat, method, diag)

    c, models = _five(collection, path, comp, params, n)
    if method == "median":
        c_hat = c_median(list(c.values()))
        return SelectionOutcome(_select_with(collection, c_hat), c_hat, method,
                                {"estimates": c, "models": models})
    default = models["window"]
    chosen, agreed = consensus(list(models.values()), default)
    # report a constant consistent with the choice
    if agreed:
        c_hat = float(np.median([c[k] for k, m in models.items() if m == chosen]))
    else:
        c_hat = c["window"]
    return SelectionOutcome(chosen, c_hat, method,
                            {"estimates": c, "models": models, "agreed": agreed})


def mallows_select(collection: Collection, sigma2: float, overpen: float = 1.0) -> SelectionOutcome:
    """Mallows-type selection ``argmin risk + overpen * sigma2 * pen1``."""
    if not sigma2 >= 0:
        raise NegativeSigma2("sigma2 must be >= 0")
    if not overpen > 0:
        raise ValidationError("overpen must be > 0")
    c_hat = overpen * sigma2
    return SelectionOutcome(_select_with(collection, c_hat), c_hat, "mallows",
                            {"sigma2": sigma2, "overpen": overpen})


def fpe_criterion(empirical_risk: float, D: float, n: int) -> float:
    if D >= n:
        raise FullDimension(f"FPE needs D < n (D={D}, n={n})")
    return empirical_risk * (1.0 + 2.0 * D / (n - D))


def gcv_criterion(empirical_risk: float, df: float, n: int) -> float:
    if df >= n:
        raise FullDf(f"GCV needs df < n (df={df}, n={n})")
    return empirical_risk * (n / (n - df)) ** 2


def _criterion_select(collection, n, crit, name):
    ok = collection.complexity < n
    if not ok.any():
        raise FullDimension("every record has complexity >= n")
    vals = np.full(len(collection), np.inf)
    vals[ok] = [crit(r, d, n) for r, d in zip(collection.risk[ok], collection.complexity[ok])]
    pos = int(np.argmin(vals))
    return SelectionOutcome(collection.ids[pos], math.nan, name,
                            {"n": n, "criterion": float(vals[pos]),
                             "skipped": int((~ok).sum())})


def fpe_select(collection: Collection, n: int) -> SelectionOutcome:
    """Minimize FPE over records with complexity < n (others are skipped)."""
    return _criterion_select(collection, n, fpe_criterion, "fpe")


def gcv_select(collection: Collection, n: int) -> SelectionOutcome:
    """Minimize GCV (complexity read as degrees of freedom) over records with df < n."""
    return _criterion_select(collection, n, gcv_criterion, "gcv")
