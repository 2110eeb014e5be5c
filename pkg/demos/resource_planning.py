# coding: utf-8
# # Shot noise, confidence intervals and Bell-pair budgets

from bellcert import make_werner, sigma_one
from bellcert.plan import pairs_for_certification, purify_and_certify_plan
from bellcert.stats import confidence_interval

# sigma(a_hat) ~ sigma1 / sqrt(n); two covariance conventions are available.
for F in (0.99, 0.95, 0.7, 0.55):
    d = sigma_one(make_werner(F), 0.0, convention="diagonal").sigma1
    j = sigma_one(make_werner(F), 0.0, convention="joint").sigma1
    print(F, round(d, 4), round(j, 4))

curve = sigma_one(make_werner(0.95), 0.01)
print("3-sigma interval at n=10000:", confidence_interval(0.95, curve, 10_000, 3.0))

# Pairs needed to certify +-0.01 at 3 sigma.
for lam in (0.0, 0.01, 0.1):
    print(lam, [pairs_for_certification(F, lam, 0.01, 3).bell_pairs for F in (0.99, 0.95, 0.7, 0.55)])

# Purify first, then certify.
for thr in (0.9, 0.99):
    plan = purify_and_certify_plan(0.7, 0.0, thr, 3)
    print(thr, plan.rounds, plan.circuit_runs, plan.bell_pairs)
