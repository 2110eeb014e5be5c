# coding: utf-8
# # Nested purification of Bell-diagonal pairs
#
# Four noisy pairs go in, the parity readouts post-select, and one pair of
# higher fidelity comes out when all three checks succeed.

import numpy as np

from bellcert import iterate, find_lambda_threshold, make_werner
from bellcert.circuit import build_circuit

# The compiled circuit, op by op.
print(build_circuit(0.0).describe())

# Noiseless iteration from a Werner state of fidelity 0.7.
traj = iterate(make_werner(0.7), 0.0, 4)
for k in range(1, len(traj)):
    r = traj[k]
    print(k, np.round(r.output.as_array(), 6), "P =", round(r.success_probability, 4))

# With gate noise the fidelity saturates (lambda=0.01) or collapses (lambda=0.1).
for lam in (0.01, 0.1):
    print(lam, np.round(iterate(make_werner(0.7), lam, 5).fidelities, 4))

# The largest noise at which a single round still helps.
for F in (0.7, 0.99):
    print(F, round(find_lambda_threshold(F), 5))
