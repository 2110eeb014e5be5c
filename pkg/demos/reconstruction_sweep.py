# coding: utf-8
# # Monte Carlo reconstruction accuracy against shot count
#
# A small version of the full sweep; `bellcert sweep` runs the full grid.

from bellcert import mc

cfg = mc.SweepConfig(0.7, 0.0, tuple(range(1000, 10_001, 1000)), 20, base_seed=3)
rows = mc.run_reconstruction_sweep(cfg, workers=2)
print(mc.sweep_csv(cfg, rows))

n = [r.n for r in rows]
# Fidelity between truth and estimate is quadratic in the error: slope near -1.
print("std fidelity slope:", round(mc.loglog_slope(n, [r.std_fidelity for r in rows]), 2))
# The estimate itself shrinks like 1/sqrt(n).
print("std a_hat slope:", round(mc.loglog_slope(n, [r.std_a_hat for r in rows]), 2))
