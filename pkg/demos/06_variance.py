"""
Residual variance and deviation bounds
======================================

Simple variance estimators, exact moments of quadratic forms, and the
(pessimistic) bounds on the threshold calibrator.
"""

import math

import numpy as np

from penmin.regress import generate_problem, projection_stats, signal
from penmin.varbounds import (
    prop2_bounds,
    residual_mse_gaussian,
    sigma2_residual,
    sigma2_rice,
    theorem1_envelope,
    var_quadratic_form,
)

n, sigma2, D = 100, 0.25, 50
problem = generate_problem("easy", n, sigma2, seed=5)
stats, _ = projection_stats(problem)
print("residual estimator:", sigma2_residual(problem.Y, n * stats[D - 1].empirical_risk, D, n).value)
print("first differences :", sigma2_rice(problem.Y).value)

# closed-form bias, variance and MSE of the residual estimator
F = signal("easy", n)
print("bias, var, mse:", residual_mse_gaussian(n, D, sigma2, float(np.sum(F[D:] ** 2))))

# variance of a quadratic form under skewed noise, checked by simulation
rng = np.random.default_rng(0)
M = np.diag([1.0, 0.5, 0.0])
E = rng.exponential(size=(200_000, 3)) - 1.0
q = np.einsum("ri,ij,rj->r", E, M, E)
print("quadratic form variance:", var_quadratic_form(M, np.zeros(3), 1.0, 2.0, 9.0), "vs", q.var())

# the bounds are valid but loose at n = 100
x = 2 * math.log(n) + math.log(4 * n)
b = prop2_bounds(x, n, T=50, c_n=25, B_cn=float(np.sum(F[25:] ** 2)) / n, sigma2=sigma2)
print(f"threshold calibrator lies in [{b.c1:.2f}, {b.c2:.2f}] with probability >= {1 - 4 * n * math.exp(-x):.4f}")
eta_minus, eta_plus, _ = theorem1_envelope(2.0, n, 0.0, sigma2)
print(f"envelope widths: {eta_minus:.2f}, {eta_plus:.2f}")
