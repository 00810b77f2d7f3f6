"""Fixed-design regression problems and per-model statistics.

Two experimental frameworks are covered:

* ``easy`` / ``hard``: ordered variable selection with canonical-basis
  projections, ``F_i = C_n / i``.  In ``hard`` the even-dimensional models
  span the *last* coordinates and are therefore very poor.
* ``kernel``: kernel ridge estimators ``A_lambda = K (K + n lambda I)^-1``
  with a Laplace kernel, indexed by their integer degrees of freedom.

For a linear estimator ``A`` the noise-dependent terms are
``p1 = n^-1 (||AY - F||^2 - ||AF - F||^2)``,
``p2 = n^-1 (||AF - Y||^2 - ||AY - Y||^2)`` and
``delta = n^-1 ||AF - F||^2 + sigma2 - n^-1 ||AF - Y||^2``.
They are evaluated through their expansions in ``(A - I)F`` and ``A eps``,
which avoids cancellation between large norms.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .collection import EstimatorRecord, validate_collection
from .exceptions import BadDimension, NegativeSigma2, SingularGrid, ValidationError, WrongFamily

FAMILIES = ("easy", "hard", "kernel")


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int or a sequence of ints (e.g. ``(master, index)``)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def harmonic_constant(n: int) -> float:
    """``(sum_{i<=n} i^-2)^(-1/2)``."""
    i = np.arange(1, n + 1, dtype=float)
    return float(np.sum(1.0 / i**2) ** -0.5)


def signal(family: str, n: int) -> np.ndarray:
    """True regression function on the design points.

    For ``easy``/``hard`` this is proportional to ``1/i`` and scaled so that
    ``n^-1 ||F||^2 = 1``.
    """
    if family in ("easy", "hard"):
        i = np.arange(1, n + 1, dtype=float)
        return math.sqrt(n) * harmonic_constant(n) / i
    if family == "kernel":
        x = np.arange(n, dtype=float) / (n - 1)
        F = np.sin(25 * np.pi * x**3)
        F[0] = 0.5
        return F
    raise WrongFamily(f"unknown family {family!r}")


@dataclass(frozen=True)
class RegressionProblem:
    n: int
    sigma2: float
    F: np.ndarray
    Y: np.ndarray
    family: str
    seed: object

    @property
    def eps(self) -> np.ndarray:
        return self.Y - self.F


def generate_problem(family: str, n: int, sigma2: float, seed) -> RegressionProblem:
    """Draw ``Y = F + eps`` with ``eps ~ N(0, sigma2 I)``.

    ``easy`` and ``hard`` share the same ``F`` and, for a given seed, the
    same noise.
    """
    if family not in FAMILIES:
        raise WrongFamily(f"unknown family {family!r}")
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise BadDimension(f"n must be an integer >= 2, got {n!r}")
    if not sigma2 >= 0:
        raise NegativeSigma2("sigma2 must be >= 0")
    F = signal(family, int(n))
    eps = math.sqrt(sigma2) * make_rng(seed).standard_normal(n)
    F.setflags(write=False)
    Y = F + eps
    Y.setflags(write=False)
    return RegressionProblem(int(n), float(sigma2), F, Y, family, seed)


@dataclass(frozen=True)
class ModelStats:
    id: object
    dimension_or_df: float
    empirical_risk: float
    true_risk: float
    p1: float
    p2: float
    delta: float
    tr_A: float
    tr_AtA: float


def _rows_to_stats(ids, dims, emp, true, p1, p2, delta, trA, trAtA):
    return [ModelStats(i, float(d), float(e), float(t), float(a), float(b), float(c),
                       float(u), float(v))
            for i, d, e, t, a, b, c, u, v in zip(ids, dims, emp, true, p1, p2, delta, trA, trAtA)]


def _linear_terms(resF, Aeps, eps, sigma2, n):
    """p1, p2, delta from ``(A - I)F``, ``A eps`` and ``eps`` (rows = models)."""
    cross = np.sum(resF * Aeps, axis=-1)
    a2 = np.sum(Aeps * Aeps, axis=-1)
    ea = np.sum(eps * Aeps, axis=-1)
    p1 = (a2 + 2 * cross) / n
    p2 = (2 * ea - a2 - 2 * cross) / n
    # ||AF - Y||^2 = ||(A-I)F||^2 - 2<(A-I)F, eps> + ||eps||^2
    delta = sigma2 - (np.sum(eps * eps) - 2 * np.sum(resF * eps, axis=-1)) / n
    return p1, p2, delta


def projection_masks(family: str, n: int) -> np.ndarray:
    """Boolean ``(n, n)`` array; row ``m - 1`` marks the coordinates of model ``m``."""
    if family not in ("easy", "hard"):
        raise WrongFamily(f"projection models need family easy or hard, got {family!r}")
    i = np.arange(n)
    m = np.arange(1, n + 1)[:, None]
    first = i[None, :] < m
    if family == "easy":
        return first
    last = i[None, :] >= n - m
    return np.where(m % 2 == 1, first, last)


def projection_stats(problem: RegressionProblem):
    """Statistics of the ``n`` projection estimators and the matching collection.

    Model ``m`` (``m = 1..n``) has dimension ``m``; the collection uses
    ``pen0 = m/n``, ``pen1 = 2m/n`` and ``complexity = m``.
    """
    if problem.family not in ("easy", "hard"):
        raise WrongFamily(f"projection_stats needs family easy or hard, got {problem.family!r}")
    n, F, Y = problem.n, problem.F, problem.Y
    eps = Y - F
    mask = projection_masks(problem.family, n)
    # prefix/suffix sums of squares give every norm in O(n) per quantity
    cy = np.concatenate([[0.0], np.cumsum(Y**2)])
    cf = np.concatenate([[0.0], np.cumsum(F**2)])
    ce = np.concatenate([[0.0], np.cumsum(eps**2)])
    m = np.arange(1, n + 1)
    if problem.family == "easy":
        inside = lambda c: c[m]
    else:
        inside = lambda c: np.where(m % 2 == 1, c[m], c[n] - c[n - m])
    emp = (cy[n] - inside(cy)) / n
    bias = (cf[n] - inside(cf)) / n
    var = inside(ce) / n
    true = bias + var
    p1, p2, delta = _linear_terms(np.where(mask, 0.0, -F), np.where(mask, eps, 0.0), eps,
                                  problem.sigma2, n)
    dims = m.astype(float)
    stats = _rows_to_stats(m.tolist(), dims, emp, true, p1, p2, delta, dims, dims)
    coll = validate_collection(
        EstimatorRecord(int(k), float(e), k / n, 2 * k / n, float(k)) for k, e in zip(m, emp))
    return stats, coll


def laplace_kernel(x, alpha: float) -> np.ndarray:
    """``K_ij = exp(-alpha |x_i - x_j|)``."""
    if not alpha > 0:
        raise ValidationError("alpha must be > 0")
    x = np.asarray(x, dtype=float)
    return np.exp(-alpha * np.abs(x[:, None] - x[None, :]))


@dataclass(frozen=True)
class RidgeGrid:
    """Kernel ridge estimators with integer degrees of freedom ``0, 1, ...``.

    ``lambdas[0]`` is ``inf`` (``A = 0``); when ``K`` is nonsingular the
    last entry is ``0`` (``A = I``).  ``shrink[i]`` holds the eigenvalues
    ``mu_j / (mu_j + n lambda_i)`` of ``A_i`` in the basis ``U``.
    """

    mu: np.ndarray
    U: np.ndarray
    lambdas: np.ndarray
    shrink: np.ndarray

    @property
    def dfs(self) -> np.ndarray:
        return self.shrink.sum(axis=1)

    @property
    def tr_AtA(self) -> np.ndarray:
        return (self.shrink**2).sum(axis=1)

    def apply(self, i: int, v) -> np.ndarray:
        """``A_i v``."""
        return self.U @ (self.shrink[i] * (self.U.T @ np.asarray(v, dtype=float)))

    def matrix(self, i: int) -> np.ndarray:
        return (self.U * self.shrink[i]) @ self.U.T

    def __iter__(self):
        for i, lam in enumerate(self.lambdas):
            h = self.shrink[i]
            yield float(lam), float(h.sum()), float((h**2).sum()), (lambda v, i=i: self.apply(i, v))

    def __len__(self):
        return len(self.lambdas)


def _shrink(mu, n, lam):
    if math.isinf(lam):
        return np.zeros_like(mu)
    if lam == 0:
        return np.ones_like(mu)
    return mu / (mu + n * lam)


def ridge_grid(K, n: int | None = None, *, tol: float = 1e-6, truncate: bool = False,
               rank_tol: float = 1e-10) -> RidgeGrid:
    """Ridge parameters whose degrees of freedom ``tr K (K + n lambda I)^-1`` are integers.

    Raises :class:`SingularGrid` when ``K`` is numerically singular, since
    ``df = n`` is then out of reach; pass ``truncate=True`` to stop at the
    largest attainable integer instead.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("K must be a square matrix")
    if not np.allclose(K, K.T, rtol=0, atol=1e-12):
        raise ValidationError("K must be symmetric")
    n = K.shape[0] if n is None else int(n)
    if n != K.shape[0]:
        raise ValidationError("n must match the size of K")
    mu, U = np.linalg.eigh(K)
    if mu.min() < -rank_tol * max(1.0, mu.max()):
        raise ValidationError("K is not positive semi-definite")
    mu = np.clip(mu, 0.0, None)
    rank = int(np.sum(mu > rank_tol * mu.max()))
    top = n
    if rank < n:
        if not truncate:
            raise SingularGrid(f"K has rank {rank} < {n}; df = {n} is unattainable")
        top = rank - 1 if rank > 0 else 0  # df -> rank only as lambda -> 0

    def df(t):
        return np.sum(mu / (mu + n * math.exp(t)))

    lams = [math.inf]
    lo, hi = -30.0, 30.0
    for i in range(1, top + 1):
        if i == n:
            lams.append(0.0)
            break
        g = lambda t: df(t) - i
        a, b = lo, hi
        while g(a) < 0:
            a -= 10.0
        while g(b) > 0:
            b += 10.0
        t = brentq(g, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
        if abs(df(t) - i) > tol:
            raise ValidationError(f"could not reach df = {i} to tolerance {tol}")
        lams.append(math.exp(t))
    lams = np.array(lams)
    shrink = np.array([_shrink(mu, n, lam) for lam in lams])
    return RidgeGrid(mu, U, lams, shrink)


def ridge_stats(problem: RegressionProblem, grid: RidgeGrid, variant: str = "alg4"):
    """Statistics of every grid estimator and the matching collection.

    ``variant="alg4"`` uses the minimal-penalty shape
    ``pen0 = (2 tr A - tr A'A) / n``; ``variant="alg3"`` uses
    ``pen0 = tr A / n``.  Both use ``pen1 = 2 tr A / n`` and
    ``complexity = tr A``.  Model ids are the grid indices.
    """
    if variant not in ("alg3", "alg4"):
        raise ValidationError("variant must be 'alg3' or 'alg4'")
    n = problem.n
    if grid.U.shape[0] != n:
        raise ValidationError("grid size does not match the problem")
    y = grid.U.T @ problem.Y
    f = grid.U.T @ problem.F
    e = y - f
    H = grid.shrink
    emp = np.sum(((H - 1) * y) ** 2, axis=1) / n
    true = np.sum((H * y - f) ** 2, axis=1) / n
    # all norms are rotation invariant, so the eigenbasis can be used throughout
    p1, p2, delta = _linear_terms((H - 1) * f, H * e, e, problem.sigma2, n)
    trA = H.sum(axis=1)
    trAtA = (H**2).sum(axis=1)
    ids = list(range(len(H)))
    stats = _rows_to_stats(ids, trA, emp, true, p1, p2, delta, trA, trAtA)
    pen0 = (2 * trA - trAtA) / n if variant == "alg4" else trA / n
    coll = validate_collection(
        EstimatorRecord(i, float(r), float(p), float(2 * t / n), float(t))
        for i, r, p, t in zip(ids, emp, pen0, trA))
    return stats, coll


def stats_to_csv(stats, fh=None):
    """Write model statistics as CSV (one row per model)."""
    out = io.StringIO() if fh is None else fh
    cols = list(ModelStats.__dataclass_fields__)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for s in stats:
        w.writerow([getattr(s, c) if c == "id" else repr(float(getattr(s, c))) for c in cols])
    return out.getvalue() if fh is None else None
