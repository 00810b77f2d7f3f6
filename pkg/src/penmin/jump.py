"""Jump-based estimates of the minimal-penalty constant.

All functions take a :class:`~penmin.path.PenalizedPath` and the complexities
of its models (a sequence aligned with ``path.models``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import NoJump, ThresholdUnreachable, UnboundedInterval, ValidationError
from .path import PenalizedPath

INF = math.inf
_SNAP = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class JumpDiagnostics:
    method: str
    c_hat: float
    jump_size: float
    interval: Optional[tuple] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"method": self.method, "c_hat": self.c_hat, "max_drop": self.jump_size}
        if self.interval is not None:
            d["interval"] = [x if math.isfinite(x) else "inf" for x in self.interval]
        d.update(self.extra)
        return d

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class WindowArgmax:
    intervals: tuple  # ((low, high), ...) half-open, increasing
    value: float


def _complexities(path, complexities):
    c = np.asarray(complexities, dtype=float)
    if c.shape != (len(path.models),):
        raise ValidationError("need one complexity per path model")
    return c


def c_max_jump(path: PenalizedPath, complexities: Sequence[float]) -> JumpDiagnostics:
    """Location of the largest complexity drop; ties go to the last one."""
    c = _complexities(path, complexities)
    if path.i_max < 1:
        raise NoJump("the path has a single segment")
    drops = c[:-1] - c[1:]
    best = drops.max()
    i = int(np.flatnonzero(drops == best)[-1]) + 1
    return JumpDiagnostics("max_jump", float(path.breakpoints[i]), float(best))


def c_threshold(path: PenalizedPath, complexities: Sequence[float], T: float) -> JumpDiagnostics:
    """Smallest ``C >= 0`` whose selected complexity is at most ``T``."""
    c = _complexities(path, complexities)
    hits = np.flatnonzero(c <= T)
    if hits.size == 0:
        raise ThresholdUnreachable(f"no model on the path has complexity <= {T}")
    i = int(hits[0])
    drop = float(c[i - 1] - c[i]) if i > 0 else 0.0
    return JumpDiagnostics("threshold", float(path.breakpoints[i]), drop, extra={"T": T})


def window_argmax_set(path: PenalizedPath, complexities: Sequence[float],
                      alpha: float, beta: float) -> WindowArgmax:
    """Exact argmax set of ``C -> comp(m(beta C)) - comp(m(alpha C))``.

    The objective is a step function whose steps sit at ``C_i / beta``
    (increment ``comp_i - comp_{i-1}``) and ``C_i / alpha`` (the opposite
    increment).  Sorting the merged abscissae and taking the cumulative sum
    gives its value on every elementary interval; a position followed by an
    equal abscissa is an empty interval and is masked out.  Adjacent
    maximizing intervals are reported separately, not merged.
    """
    if not alpha > beta > 0:
        raise ValidationError("need alpha > beta > 0")
    c = _complexities(path, complexities)
    imax = path.i_max
    if imax == 0:
        return WindowArgmax(((0.0, INF),), 0.0)
    bp = np.asarray(path.breakpoints[1:-1], dtype=float)
    inc = c[1:] - c[:-1]
    xs = np.concatenate([bp / beta, bp / alpha])
    deltas = np.concatenate([inc, -inc])
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    # abscissae equal in exact arithmetic may differ by a rounding error
    # (e.g. 2/sqrt(2) vs 1/(1/sqrt(2))); merge them to avoid phantom pieces
    gap = np.diff(xs) > _SNAP * xs[1:]
    last = np.append(np.flatnonzero(gap), xs.size - 1)
    xs = xs[last][np.concatenate([[0], np.cumsum(gap)])]
    w = np.cumsum(deltas[order])
    nxt = np.append(xs[1:], INF)
    v = np.where(xs < nxt, w, -INF)
    best = v.max()
    intervals = [(float(xs[k]), float(nxt[k])) for k in np.flatnonzero(v == best)]
    # before the first shifted breakpoint the objective is 0
    if best <= 0:
        if best < 0:
            intervals = []
            best = 0.0
        intervals.insert(0, (0.0, float(xs[0])))
    return WindowArgmax(tuple(intervals), float(best))


def c_window(path: PenalizedPath, complexities: Sequence[float], eta: float) -> JumpDiagnostics:
    """Geometric mean of the last maximizing interval over windows ``[C/(1+eta), C(1+eta)]``."""
    if not eta > 0:
        raise ValidationError("eta must be > 0")
    if path.i_max < 1:
        raise NoJump("the path has a single segment")
    res = window_argmax_set(path, complexities, 1.0 + eta, 1.0 / (1.0 + eta))
    low, high = res.intervals[-1]
    if math.isinf(high):
        raise UnboundedInterval("last maximizing interval is unbounded")
    return JumpDiagnostics("window", math.sqrt(low * high), res.value, (low, high),
                           extra={"eta": eta})
