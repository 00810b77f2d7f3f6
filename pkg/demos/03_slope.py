"""
Slope-based calibration
=======================

For large models the empirical risk decreases linearly in the dimension
with slope -sigma2/n.  A least-squares fit over the largest models, and
the robust platform search, both read sigma2 off that slope.
"""

import numpy as np

from penmin import c_slope, capushe, theil_sen_slope
from penmin.regress import generate_problem, projection_stats

n, sigma2 = 100, 0.25
stats, coll = projection_stats(generate_problem("easy", n, sigma2, seed=2))

fit = c_slope(coll, D0=n / 2, n=n)
print(f"least squares over D >= n/2: C/sigma2 = {fit.c_hat / sigma2:.3f} ({fit.n_points} points)")

# a single outlier barely moves the median of pairwise slopes
pts = [(0, 0), (1, 1), (2, 2), (3, 3), (4, 100)]
print("robust slope with an outlier:", theil_sen_slope(pts))

res = capushe(coll, n, pct=0.15)
print(f"platform search: C/sigma2 = {res.c_hat / sigma2:.3f}, selected dimension {res.selected_id}")
for k, pl in enumerate(res.platforms):
    mark = "<- chosen" if k == res.chosen_platform else ""
    print(f"  platform from D = {pl.D_start:3d}: length {pl.N:3d}, model {pl.model} {mark}")

# the hard setting breaks slope fits: every other model is very poor
_, hard = projection_stats(generate_problem("hard", n, sigma2, seed=2))
print(f"hard setting, least squares: C/sigma2 = {c_slope(hard, n / 2, n).c_hat / sigma2:.2f}")
print("mean risk of even vs odd models:",
      np.round([hard.risk[1::2].mean(), hard.risk[::2].mean()], 3))
