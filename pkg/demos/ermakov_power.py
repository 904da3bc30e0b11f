"""
Type II error of the optimal quadratic test
===========================================
"""

from sharpadapt import AlternativeSpec, ermakov_test, estimate_size, estimate_type2, solve_saddlepoint

n = 1e5
spec = AlternativeSpec.at_rate(1.0, 1.0, 1.0, n)
test = ermakov_test(spec, n, alpha=0.05)
f0 = solve_saddlepoint(spec, n).f0

size = estimate_size(test, n, reps=5000, seed=1)
miss = estimate_type2(test, f0, n, reps=5000, seed=1)
print(f"size    {size.estimate:.4f} +/- {size.stderr:.4f}")
print(f"type II {miss.estimate:.4f} +/- {miss.stderr:.4f}  (predicted {test.predicted_type2:.4f})")

# larger signals along the same direction are easier to detect
for t in (1.0, 1.5, 2.0):
    print(t, estimate_type2(test, f0.scaled(t), n, reps=2000, seed=2).estimate)
