"""
Kernel ridge regression
=======================

Ridge estimators with a Laplace kernel are indexed by their degrees of
freedom.  With the penalty shape (2 tr A - tr A'A)/n a clear jump
appears near sigma2; with tr A / n it does not.
"""

import numpy as np

from penmin import c_window, compute_path, window_argmax_set
from penmin.regress import generate_problem, laplace_kernel, ridge_grid, ridge_stats

n = 200
x = np.arange(n) / (n - 1)
grid = ridge_grid(laplace_kernel(x, alpha=8.0))
print("degrees of freedom hit the integers:", np.abs(grid.dfs - np.arange(n + 1)).max() < 1e-6)

problem = generate_problem("kernel", n, sigma2=1.0, seed=4)
eta = n ** -0.5
for variant in ("alg4", "alg3"):
    stats, coll = ridge_stats(problem, grid, variant)
    path = compute_path(coll)
    comp = path.complexities(coll)
    win = window_argmax_set(path, comp, 1 + eta, 1 / (1 + eta))
    frac = win.value / (comp.max() - comp.min())
    line = f"{variant}: largest windowed drop = {frac:.0%} of the df range"
    try:
        line += f", C/sigma2 = {c_window(path, comp, eta).c_hat:.3f}"
    except Exception as exc:
        line += f" ({type(exc).__name__})"
    print(line)
