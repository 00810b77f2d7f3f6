"""Residual-variance estimators and closed-form error bounds.

Covers the residual estimator on a fixed model, the first-difference (Rice)
estimator, exact moments of quadratic forms in non-Gaussian noise, the
deviation bounds for the threshold calibrator and the non-asymptotic
envelopes of the dimension-jump theory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import AsymmetricM, BadRange, FullDimension, TooShort, ValidationError


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    method: str  # residual_m0 | rice | minimal_penalty
    D_m0: Optional[float] = None


def sigma2_residual(Y, residual_sq_norm: float, D_m0: float, n: int) -> VarianceEstimate:
    """``||Y - F_m0||^2 / (n - D_m0)``.

    ``Y`` is accepted for interface symmetry with :func:`sigma2_rice`; only
    its length is checked.
    """
    if Y is not None and len(Y) != n:
        raise ValidationError("len(Y) must equal n")
    if D_m0 >= n:
        raise FullDimension(f"need D_m0 < n (D_m0={D_m0}, n={n})")
    if residual_sq_norm < 0:
        raise ValidationError("residual_sq_norm must be >= 0")
    return VarianceEstimate(residual_sq_norm / (n - D_m0), "residual_m0", D_m0)


def sigma2_rice(Y) -> VarianceEstimate:
    """First-difference estimator ``sum (Y_{i+1} - Y_i)^2 / (2(n-1))``."""
    Y = np.asarray(Y, dtype=float)
    if Y.size < 2:
        raise TooShort("need at least two observations")
    d = np.diff(Y)
    return VarianceEstimate(float(d @ d / (2 * (Y.size - 1))), "rice")


def residual_mse_gaussian(n: int, D: float, sigma2: float, bias_sq: float):
    """Bias, variance and MSE of the residual estimator under Gaussian noise.

    ``bias_sq`` is the unnormalized approximation error ``||(I - P)F||^2``.
    Returns ``(bias, variance, mse)``.
    """
    if D >= n:
        raise FullDimension(f"need D < n (D={D}, n={n})")
    if min(D, sigma2, bias_sq) < 0:
        raise ValidationError("D, sigma2 and bias_sq must be >= 0")
    k = n - D
    bias = bias_sq / k
    variance = 2 * sigma2**2 / k + 4 * sigma2 * bias_sq / k**2
    return bias, variance, variance + bias**2


def var_quadratic_form(M, F, sigma2: float, m3: float, m4: float) -> float:
    """Variance of ``<F + eps, M (F + eps)>`` for independent noise with given moments.

    ``eps_i`` has mean 0, variance ``sigma2``, third moment ``m3`` and
    fourth moment ``m4``.
    """
    M = np.asarray(M, dtype=float)
    F = np.asarray(F, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != F.size:
        raise ValidationError("M must be square and match F")
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12):
        raise AsymmetricM("M must be symmetric")
    if m4 < sigma2**2:
        raise ValidationError("moments are inconsistent: need m4 >= sigma2^2")
    d = np.diag(M)
    W = (d @ d) * (m4 - 3 * sigma2**2) + 2 * np.sum(M * M) * sigma2**2
    MF = M @ F
    return float(W + 4 * (MF @ MF) * sigma2 + 4 * (F @ (M @ d)) * m3)


def residual_moments(P, F, sigma2: float, m3: float = 0.0, m4: Optional[float] = None):
    """Exact ``(mean, variance, mse)`` of the residual estimator on projection ``P``.

    ``m4`` defaults to the Gaussian value ``3 sigma2^2``.
    """
    P = np.asarray(P, dtype=float)
    F = np.asarray(F, dtype=float)
    n = F.size
    M = np.eye(n) - P
    k = float(np.trace(M))
    if k <= 0:
        raise FullDimension("projection has full rank")
    m4 = 3 * sigma2**2 if m4 is None else m4
    r = M @ F
    mean = sigma2 + (r @ r) / k
    var = var_quadratic_form(M, F, sigma2, m3, m4) / k**2
    return mean, var, var + (mean - sigma2) ** 2


@dataclass(frozen=True)
class BoundSet:
    c1: float
    c2: float
    mse_bound: float
    mse_bound_relaxed: float
    eta_minus: float
    eta_plus: float
    B_cn: float


def prop2_bounds(x: float, n: int, T: float, c_n: float, B_cn: float, sigma2: float, *,
                 B_half_T: Optional[float] = None, card_M: Optional[int] = None,
                 gamma: Optional[float] = None, B_n20: Optional[float] = None) -> BoundSet:
    """Deviation bounds ``c1 <= C_thr(T) <= c2`` and the MSE bound of the threshold calibrator.

    ``c1`` is returned unclamped and may be negative.  The MSE bounds need
    ``B_half_T`` (best approximation error among models of complexity
    ``<= T/2``) and ``card_M``; they are ``nan`` otherwise, as are the
    envelope widths unless ``gamma`` and ``B_n20`` are given.  The relaxed
    bound only holds for ``card_M >= 100``.
    """
    if not (0 <= c_n < T < n):
        raise BadRange(f"need 0 <= c_n < T < n (c_n={c_n}, T={T}, n={n})")
    if x < 0:
        raise BadRange("x must be >= 0")
    r = math.sqrt(x / n)
    c1 = sigma2 * (1 - (4 * r + 6 * x / n) / (1 - T / n))
    k = 2 * n / (T - c_n)
    c2 = sigma2 * (1 + 2 * k * (r + 2 * x / n)) + k * B_cn
    mse = relaxed = math.nan
    if B_half_T is not None and card_M is not None:
        lead = max((1 - T / n) ** -2, (T / (2 * n)) ** -2)
        lg = math.log(4 * card_M) / n
        mse = 739 * lead * (B_half_T**2 + sigma2**2 * lg + sigma2**2 * lg**2)
        if card_M >= 100:
            relaxed = lead * (12 * B_half_T**2 + 102 * sigma2**2 * math.log(card_M) / n)
    eta_m = eta_p = math.nan
    if gamma is not None and B_n20 is not None:
        eta_m, eta_p, _ = theorem1_envelope(gamma, n, B_n20, sigma2)
    return BoundSet(c1, c2, mse, relaxed, eta_m, eta_p, B_cn)


def risksmall(u: float) -> float:
    if 1 < u < 2:
        return 10 / (u - 1) ** 4
    if u >= 2:
        return u**3
    return math.inf


def theorem1_envelope(gamma: float, n: int, B_n20: float, sigma2: float):
    """``(eta_minus, eta_plus, risksmall)`` of the dimension-jump guarantees.

    ``B_n20`` is the best approximation error among models of dimension
    ``<= n/20``.  ``risksmall`` is ``inf`` for ``u <= 1``, where no bound
    applies.
    """
    if gamma < 0 or n < 2:
        raise ValidationError("need gamma >= 0 and n >= 2")
    s = math.sqrt(gamma * math.log(n) / n)
    eta_minus = 41 * s
    eta_plus = (40 * B_n20 + 82 * sigma2 * s) / sigma2 if sigma2 > 0 else math.inf
    f: Callable[[float], float] = risksmall
    return eta_minus, eta_plus, f
