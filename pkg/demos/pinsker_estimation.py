"""
Pinsker filter and its size-adaptive plug-in
============================================
"""

from sharpadapt import (
    GolubevEstimator, default_estimation_tuning, estimate_estimation_risk, exact_filter_risk,
    golubev_oracle_filter, pinsker_constant, pinsker_filter, pinsker_least_favorable,
    worst_case_risk,
)

beta, M = 1.0, 1.0
for n in (1e4, 1e5, 1e6):
    w = pinsker_filter(n, beta, M)
    bound = pinsker_constant(beta) * n ** (-2 * beta / (2 * beta + 1)) * M ** (1 / (2 * beta + 1))
    print(f"n={n:.0e}  worst-case risk / bound = {worst_case_risk(w, beta, M) / bound:.4f}")

n = 1e5
tuning = default_estimation_tuning(n, beta)
f = pinsker_least_favorable(n, beta, M)
bias2, var, oracle = exact_filter_risk(f, golubev_oracle_filter(f, n, beta, tuning))
mc = estimate_estimation_risk(GolubevEstimator(beta, tuning), f, n, reps=1000, seed=4)
print(f"oracle risk {oracle:.3e} (bias^2 {bias2:.2e}, variance {var:.2e})")
print(f"plug-in     {mc.estimate:.3e} +/- {mc.stderr:.1e}")
