"""
The penalized-argmin path
=========================

Every collection of estimators traces a piecewise-constant path
C -> argmin risk + C * pen0.  It is computed exactly, once, and can then
be queried for any C.
"""

import numpy as np

from penmin import brute_force_argmin, compute_path, evaluate_path, from_arrays, lower_convex_envelope

# three estimators: empirical risk falls as the penalty shape grows
coll = from_arrays([3.0, 1.0, 0.0], [1.0, 2.0, 3.0], ids=["small", "medium", "large"])
path = compute_path(coll)
print("breakpoints:", path.breakpoints)
print("models     :", path.models)

# segments are half-open: at C = 1 the right-hand model already owns the point
for C in (0.0, 0.5, 1.0, 1.5, 2.0, 10.0):
    print(f"C = {C:4}:", evaluate_path(path, C))

# the path visits the vertices of the lower convex envelope of the L-curve
env = lower_convex_envelope(coll)
print("envelope slopes:", env.slopes)

# a larger random collection, checked against the brute-force scan
rng = np.random.default_rng(0)
big = from_arrays(rng.random(40), np.sort(rng.random(40)))
p = compute_path(big)
Cs = rng.random(1000) * 2 * p.breakpoints[-2]
agree = all(evaluate_path(p, C) == brute_force_argmin(big, C) for C in Cs)
print(f"{p.i_max + 1} segments; agrees with brute force on 1000 queries: {agree}")

# paths serialize to JSON (the open right end is written as "inf")
print(path.to_json())
