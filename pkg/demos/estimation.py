# coding: utf-8
# # Reconstructing a Bell-diagonal state from three parity proportions

import numpy as np

from bellcert import invert, make_werner, sample_shots
from bellcert.circuit import build_circuit, joint_parity_distribution
from bellcert.estimate import estimate_from_tally, rounded_noiseless_estimator

truth = make_werner(0.8)

# Exact forward probabilities invert back to the state, with or without noise.
for lam in (0.0, 0.01, 0.1):
    model = build_circuit(lam)
    p = joint_parity_distribution(truth, model).agree
    print(lam, np.round(p, 6), np.round(invert(p, lam, model).state.as_array(), 10))

# The rounded-coefficient closed form is close but not exact.
p = joint_parity_distribution(truth, build_circuit(0.0)).agree
print("rounded form:", rounded_noiseless_estimator(*p))

# From finite shots.
tally = sample_shots(truth, build_circuit(0.0), 20_000, seed=7)
print("from 20000 shots:", np.round(estimate_from_tally(tally).state.as_array(), 4))
