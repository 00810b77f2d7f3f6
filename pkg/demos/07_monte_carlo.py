"""
Monte-Carlo experiments
=======================

A small run of the full simulation harness: all calibrators on common
random numbers, the agreement table, and the overpenalization sweep.
Raise N for publication-grade precision.
"""

from penmin.sim import SimConfig, agreement_table, overpenalization_sweep, run_monte_carlo

cfg = SimConfig(setting="easy", N=200, master_seed=0)
print(run_monte_carlo(cfg).to_text())

print()
print("hard setting:", {k: round(v, 3) for k, v in agreement_table(SimConfig(setting="hard", N=200)).items()})

sweep = overpenalization_sweep(cfg)
print(f"\nbest overpenalization C = {sweep.best_C:.2f}, gain over C = 1: {sweep.improvement_factor:.4f}")
