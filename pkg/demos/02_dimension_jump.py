"""
Locating the dimension jump
===========================

On a noisy ordered-selection problem the selected dimension collapses
when C crosses the noise level.  Three jump-based calibrators locate
that collapse.
"""

from penmin import c_max_jump, c_threshold, c_window, compute_path
from penmin.regress import generate_problem, projection_stats

n, sigma2 = 100, 0.25
problem = generate_problem("easy", n, sigma2, seed=3)
stats, coll = projection_stats(problem)

path = compute_path(coll)
comp = path.complexities(coll)

# the selected dimension along the path
for C, D in zip(path.breakpoints, comp):
    print(f"from C = {C:.4f}: dimension {D:.0f}")

# largest single drop, first crossing of T = n/2, and a smoothed window version
for d in (c_max_jump(path, comp), c_threshold(path, comp, n / 2), c_window(path, comp, n ** -0.5)):
    print(f"{d.method:<9} C/sigma2 = {d.c_hat / sigma2:.3f}   drop = {d.jump_size:.0f}")
