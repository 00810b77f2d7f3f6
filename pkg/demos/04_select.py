"""
End-to-end model selection
==========================

Estimate the minimal-penalty constant, then select with twice the
minimal penalty.  Results are compared with Mallows' Cp using the true
noise level, FPE and GCV.
"""

import numpy as np

from penmin import fpe_select, gcv_select, mallows_select, minimal_penalty_select
from penmin.regress import generate_problem, projection_stats

n, sigma2 = 100, 0.25
stats, coll = projection_stats(generate_problem("easy", n, sigma2, seed=3))
true = np.array([s.true_risk for s in stats])
oracle = true.min()

params = dict(T=n / 2, eta=n ** -0.5, D0=n / 2, pct=0.15)
for method in ("max_jump", "threshold", "window", "slope", "capushe", "median", "consensus"):
    out = minimal_penalty_select(coll, method, **params)
    print(f"{method:<10} C/sigma2 = {out.c_hat / sigma2:.3f}  D = {out.selected_id:3d}"
          f"  risk ratio = {true[out.selected_id - 1] / oracle:.3f}")

for out in (mallows_select(coll, sigma2), mallows_select(coll, sigma2, overpen=1.12),
            fpe_select(coll, n), gcv_select(coll, n)):
    print(f"{out.method:<10} D = {out.selected_id:3d}  risk ratio = {true[out.selected_id - 1] / oracle:.3f}")

# outcomes are JSON-ready
print(minimal_penalty_select(coll, "window", eta=0.1).to_json())
