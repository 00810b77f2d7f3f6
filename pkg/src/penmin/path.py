"""Exact computation of the penalized-argmin trajectory ``C -> m(C)``.

``m(C)`` minimizes ``risk(m) + C * pen0(m)`` with ties broken by the
collection order.  The map is piecewise constant: it equals ``models[i]`` on
``[breakpoints[i], breakpoints[i + 1])``, with ``breakpoints[0] == 0`` and a
final breakpoint at ``+inf``.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .collection import Collection
from .exceptions import NegativeC, ValidationError

INF = math.inf


@dataclass(frozen=True)
class PenalizedPath:
    breakpoints: tuple  # C_0 = 0 < C_1 < ... < C_{i_max} < C_{i_max+1} = inf
    models: tuple  # record ids m_0, ..., m_{i_max}
    positions: tuple = ()  # indices of the models in the source collection

    @property
    def i_max(self) -> int:
        return len(self.models) - 1

    def complexities(self, collection: Collection) -> np.ndarray:
        """Complexity of each path model, in path order."""
        if self.positions:
            return collection.complexity[list(self.positions)]
        return np.array([collection.record(m).complexity for m in self.models])

    def to_json(self) -> str:
        bps = [b if math.isfinite(b) else "inf" for b in self.breakpoints]
        return json.dumps({"breakpoints": bps, "models": list(self.models)})

    @classmethod
    def from_json(cls, text: str) -> "PenalizedPath":
        d = json.loads(text)
        bps = tuple(INF if b == "inf" else float(b) for b in d["breakpoints"])
        models = tuple(d["models"])
        if len(bps) != len(models) + 1 or bps[0] != 0 or bps[-1] != INF:
            raise ValidationError("malformed path JSON")
        if any(b >= c for b, c in zip(bps, bps[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        return cls(bps, models)


def compute_path(collection: Collection) -> PenalizedPath:
    """Full trajectory of the penalized argmin, in ``O(i_max * |M|)``.

    Starting from the order-smallest risk minimizer, each step moves to the
    model of the improvement set ``{f(m) > f(cur), g(m) < g(cur)}`` reached
    first as ``C`` increases, i.e. the one minimizing
    ``(f(m) - f(cur)) / (g(cur) - g(m))``; ties go to the order-smallest.
    """
    f = collection.risk
    g = collection.pen0
    cur = int(np.argmin(f))  # first occurrence = order-smallest
    bps = [0.0]
    pos = [cur]
    while True:
        cand = np.flatnonzero((f > f[cur]) & (g < g[cur]))
        if cand.size == 0:
            break
        ratios = (f[cand] - f[cur]) / (g[cur] - g[cand])
        c_next = ratios.min()
        # candidates are in collection order, so the first hit is order-smallest
        cur = int(cand[np.flatnonzero(ratios == c_next)[0]])
        bps.append(float(c_next))
        pos.append(cur)
    bps.append(INF)
    return PenalizedPath(tuple(bps), tuple(collection.ids[p] for p in pos), tuple(pos))


def segment_index(path: PenalizedPath, C: float) -> int:
    if not C >= 0:
        raise NegativeC(f"C must be >= 0, got {C!r}")
    # breakpoint C_i belongs to segment i
    return bisect.bisect_right(path.breakpoints, C) - 1


def evaluate_path(path: PenalizedPath, C: float):
    """Model selected at penalty constant ``C`` (binary search)."""
    return path.models[segment_index(path, C)]


def evaluate_path_many(path: PenalizedPath, Cs) -> np.ndarray:
    """Vectorized segment indices for an array of non-negative constants."""
    Cs = np.asarray(Cs, dtype=float)
    if np.any(~(Cs >= 0)):
        raise NegativeC("all C must be >= 0")
    return np.searchsorted(np.asarray(path.breakpoints), Cs, side="right") - 1


class Envelope(NamedTuple):
    vertices: tuple  # path models, in path order
    slopes: tuple  # slope of the segment from vertices[i] to vertices[i + 1]


def lower_convex_envelope(collection: Collection) -> Envelope:
    """Vertices of the lower convex envelope of the L-curve ``(pen0, risk)``.

    Read off the path: the vertices are the path models and the segment
    joining ``m_{i-1}`` to ``m_i`` has slope ``-C_i``.
    """
    path = compute_path(collection)
    slopes = tuple(-c for c in path.breakpoints[1:-1])
    return Envelope(path.models, slopes)
