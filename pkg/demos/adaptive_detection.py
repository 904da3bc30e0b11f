"""
Detection without knowing the ellipsoid size
============================================

The adaptive test estimates the size functional from the data and
picks its weights from that estimate.  Only rho, beta and alpha go in.
"""

import math

from sharpadapt import (
    AdaptiveTest, AlternativeSpec, asymptotic_type2, default_tuning, ermakov_A,
    estimate_size, estimate_type2, separation_radius, solve_saddlepoint,
)

n, beta, alpha = 1e5, 1.0, 0.05
c_n = math.log(n)
rho = separation_radius(c_n, n, beta)
tuning = default_tuning(c_n, n, beta)
print("N_tilde window", tuning.bounds, "chosen", tuning.N_tilde)

for mode in ("split", "plug_in"):
    test = AdaptiveTest(rho, beta, alpha, tuning, mode)
    size = estimate_size(test, n, reps=4000, seed=3)
    print(f"{mode:8s} size {size.estimate:.4f} +/- {size.stderr:.4f}")
    for M in (0.5, 1.0, 2.0):
        f0 = solve_saddlepoint(AlternativeSpec(beta, M, rho), n).f0
        miss = estimate_type2(test, f0, n, reps=4000, seed=3)
        bound = asymptotic_type2(alpha, ermakov_A(c_n, beta, M))
        print(f"    M={M}: type II {miss.estimate:.4f}  (limit {bound:.2e})")
