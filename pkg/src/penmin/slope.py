"""Slope-based estimates of the minimal-penalty constant and combiners.

The slope heuristics says that, for large models, the empirical risk decreases
linearly in ``pen0`` with slope ``-C*``.  ``c_slope`` fits that slope by
least squares; ``capushe`` scans the lower end of the fitting range with a
robust fit (Huber M-estimation by default, Theil-Sen on request) and keeps
the last stable selection.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .collection import Collection, validate_collection
from .exceptions import DegenerateX, NonFinite, TooFewDimensions, TooFewPoints, ValidationError


@dataclass(frozen=True)
class SlopeFit:
    c_hat: float
    n_points: int
    residual_sse: float


@dataclass(frozen=True)
class Platform:
    D_start: int
    N: int
    model: Hashable


@dataclass(frozen=True)
class CapusheResult:
    selected_id: Hashable
    c_hat: float
    platforms: tuple
    chosen_platform: int
    slopes: tuple = ()  # robust slope for D = 1 .. n-2
    fallback: bool = False

    def platforms_json(self) -> str:
        return json.dumps([{"D_start": p.D_start, "N": p.N, "model": p.model}
                           for p in self.platforms])


def _as_xy(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError("points must be a sequence of (x, y) pairs")
    return pts[:, 0], pts[:, 1]


def ols_slope(points) -> float:
    """Least-squares slope of ``y`` on ``x``."""
    x, y = _as_xy(points)
    if len(x) < 2:
        raise TooFewPoints("need at least two points")
    xc = x - x.mean()
    sxx = xc @ xc
    if sxx == 0:
        raise DegenerateX("all x values are equal")
    return float(xc @ (y - y.mean()) / sxx)


def _pairwise_slopes(x, y):
    i, j = np.triu_indices(len(x), k=1)
    dx = x[j] - x[i]
    keep = dx != 0
    return (y[j] - y[i])[keep] / dx[keep]


def theil_sen_slope(points) -> float:
    """Median of all pairwise slopes over pairs with distinct ``x``.

    With an even number of slopes the two central values are averaged.
    """
    x, y = _as_xy(points)
    if len(x) < 2:
        raise TooFewPoints("need at least two points")
    s = _pairwise_slopes(x, y)
    if s.size == 0:
        raise DegenerateX("all x values are equal")
    return float(np.median(s))


HUBER_K = 1.345


def _wls_rows(x, y, w):
    """Weighted least-squares line for every row of weights ``w``; returns (intercept, slope)."""
    sw = w.sum(axis=1)
    if np.any(sw <= 0):
        raise TooFewPoints("a fit has no points")
    xm = (w @ x) / sw
    ym = (w @ y) / sw
    xc = x[None, :] - xm[:, None]
    sxx = np.sum(w * xc * xc, axis=1)
    if np.any(sxx <= 0):
        raise DegenerateX("all x values in a fit are equal")
    b = np.sum(w * xc * (y[None, :] - ym[:, None]), axis=1) / sxx
    return ym - b * xm, b


def _row_median(v, counts):
    """Median of the first ``counts[i]`` smallest entries of each row (others are +inf)."""
    v = np.sort(v, axis=1)
    rows = np.arange(len(v))
    return (v[rows, (counts - 1) // 2] + v[rows, counts // 2]) / 2


def _huber_rows(x, y, mask, k=HUBER_K, maxit=20, acc=1e-4):
    """Huber M-estimates of the slope, one per row of the boolean ``mask``.

    Iteratively reweighted least squares started from the LS fit, with the
    scale re-estimated at each step as ``median|r| / 0.6745``.  A row stops
    when the relative change of its residuals drops below ``acc``, or when
    its scale is zero (an exact fit on at least half of the points).
    """
    a, b = _wls_rows(x, y, mask.astype(float))
    r = y[None, :] - a[:, None] - b[:, None] * x[None, :]
    active = np.ones(len(mask), dtype=bool)
    for _ in range(maxit):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        m = mask[idx]
        rr = r[idx]
        s = _row_median(np.where(m, np.abs(rr), np.inf), m.sum(axis=1)) / 0.6745
        stop = s <= 0
        active[idx[stop]] = False
        idx, m, rr, s = idx[~stop], m[~stop], rr[~stop], s[~stop]
        if idx.size == 0:
            break
        with np.errstate(divide="ignore"):
            w = np.where(m, np.minimum(1.0, k * s[:, None] / np.abs(rr)), 0.0)
        a_new, b_new = _wls_rows(x, y, w)
        rn = y[None, :] - a_new[:, None] - b_new[:, None] * x[None, :]
        old = np.where(m, rr, 0.0)
        change = np.sqrt(np.sum((old - np.where(m, rn, 0.0)) ** 2, axis=1)
                         / np.maximum(np.sum(old * old, axis=1), 1e-20))
        a[idx], b[idx], r[idx] = a_new, b_new, rn
        active[idx[change <= acc]] = False
    return b


def huber_slope(points, k: float = HUBER_K, maxit: int = 20, acc: float = 1e-4) -> float:
    """Huber M-estimate of the slope of ``y`` on ``x`` (MAD scale, IRLS)."""
    x, y = _as_xy(points)
    if len(x) < 2:
        raise TooFewPoints("need at least two points")
    return float(_huber_rows(x, y, np.ones((1, len(x)), dtype=bool), k, maxit, acc)[0])


def c_slope(collection: Collection, D0: float, n: int) -> SlopeFit:
    """OLS slope of the empirical risk against ``-complexity / n``.

    Only records with ``complexity >= D0`` enter the fit.
    """
    keep = collection.complexity >= D0
    if keep.sum() < 2:
        raise TooFewPoints(f"fewer than two records with complexity >= {D0}")
    x = -collection.complexity[keep] / n
    y = collection.risk[keep]
    b = ols_slope(np.column_stack([x, y]))
    a = y.mean() - b * x.mean()
    sse = float(np.sum((y - a - b * x) ** 2))
    return SlopeFit(b, int(keep.sum()), sse)


def dedupe_by_complexity(collection: Collection) -> Collection:
    """Keep, for each complexity value, the record with the smallest risk."""
    best = {}
    for pos, r in enumerate(collection.records):
        k = r.complexity
        if k not in best or r.empirical_risk < collection.records[best[k]].empirical_risk:
            best[k] = pos
    if len(best) == len(collection):
        return collection
    return validate_collection(collection.records[p] for p in sorted(best.values()))


def _robust_slope_scan(d, risk, n, D_values, regression="huber"):
    """Robust slope of risk vs ``-d/n`` restricted to ``d >= D`` for each D."""
    order = np.argsort(d, kind="stable")
    d = d[order]
    risk = risk[order]
    x = -d / n
    if regression == "huber":
        mask = d[None, :] >= np.asarray(D_values, dtype=float)[:, None]
        if np.any(mask.sum(axis=1) < 2):
            raise TooFewPoints("fewer than two records above some D")
        return _huber_rows(x, risk, mask)
    dx = x[None, :] - x[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        S = (risk[None, :] - risk[:, None]) / dx
    valid = np.triu(dx != 0, k=1)
    out = np.empty(len(D_values))
    for k, D in enumerate(D_values):
        start = int(np.searchsorted(d, D, side="left"))
        sub = S[start:, start:][valid[start:, start:]]
        if sub.size == 0:
            raise TooFewPoints(f"no usable pair with complexity >= {D}")
        out[k] = np.median(sub)
    return out


def capushe(collection: Collection, n: int, pct: float = 0.15,
            regression: str = "huber") -> CapusheResult:
    """Platform-stability slope procedure.

    For every ``D`` in ``1 .. n-2`` a robust slope ``s(D)`` is fitted on the
    records with complexity ``>= D`` and the model minimizing
    ``risk + s(D) * pen1`` is recorded.  Runs of equal selections are
    platforms; the last platform longer than ``pct * (n - 2)`` wins, or,
    failing that, the last of the longest ones.  ``c_hat`` is the upper
    median of ``s(D)`` over the chosen platform.

    ``regression`` is ``"huber"`` (default) or ``"theil_sen"``.
    """
    if n < 4:
        raise TooFewDimensions("capushe needs n >= 4")
    if not 0 < pct < 1:
        raise ValidationError("pct must lie in (0, 1)")
    if regression not in ("huber", "theil_sen"):
        raise ValidationError("regression must be 'huber' or 'theil_sen'")
    coll = dedupe_by_complexity(collection)
    D_values = np.arange(1, n - 1)
    slopes = _robust_slope_scan(coll.complexity, coll.risk, n, D_values, regression)
    crit = coll.risk[None, :] + slopes[:, None] * coll.pen1[None, :]
    sel = np.argmin(crit, axis=1)

    platforms = []
    start = 0
    for k in range(1, len(sel) + 1):
        if k == len(sel) or sel[k] != sel[start]:
            platforms.append(Platform(int(D_values[start]), k - start, coll.ids[sel[start]]))
            start = k
    sizes = np.array([p.N for p in platforms])
    big = np.flatnonzero(sizes > pct * (n - 2))
    fallback = big.size == 0
    if fallback:
        chosen = int(np.flatnonzero(sizes == sizes.max())[-1])
    else:
        chosen = int(big[-1])
    p = platforms[chosen]
    lo = p.D_start - 1
    vals = np.sort(slopes[lo:lo + p.N])
    c_hat = float(vals[len(vals) // 2])
    return CapusheResult(p.model, c_hat, tuple(platforms), chosen,
                         tuple(float(s) for s in slopes), fallback)


def c_median(estimates: Sequence[float]) -> float:
    """Middle order statistic of exactly five estimates."""
    v = np.asarray(estimates, dtype=float)
    if v.shape != (5,):
        raise ValidationError("c_median expects exactly five values")
    if not np.all(np.isfinite(v)):
        raise NonFinite("all estimates must be finite")
    return float(np.sort(v)[2])


def consensus(choices: Sequence[Hashable], default_id: Hashable):
    """Majority vote among five model choices.

    Returns ``(id, True)`` when at least three choices coincide and
    ``(default_id, False)`` otherwise.
    """
    if len(choices) != 5:
        raise ValidationError("consensus expects exactly five choices")
    winner, count = Counter(choices).most_common(1)[0]
    if count >= 3:
        return winner, True
    return default_id, False
