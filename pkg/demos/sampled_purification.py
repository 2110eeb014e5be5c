# coding: utf-8
# # Purification driven by sampled shots instead of exact probabilities

from bellcert import make_werner
from bellcert.mc import run_sampled_purification, sampled_purification_csv

rows = run_sampled_purification(make_werner(0.7), 0.01, rounds=3, shots=100_000, seed=5)
print(sampled_purification_csv(rows))
