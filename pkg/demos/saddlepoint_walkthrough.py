"""
Least-favourable signals by water-filling
=========================================

Solve the finite-n saddle problem and compare with its limiting constant.
"""

import math

import numpy as np

from sharpadapt import AlternativeSpec, ermakov_A, solve_saddlepoint

# separation radius at the rate n^{-4b/(4b+1)} with constant c = 1
beta, M, c = 1.0, 1.0, 1.0
for n in (1e4, 1e5, 1e6, 1e7):
    spec = AlternativeSpec.at_rate(beta, M, c, n)
    sp = solve_saddlepoint(spec, n)
    print(f"n={n:.0e}  cutoff={sp.cutoff_J:4d}  L0={sp.L0:.5f}")

print("limit sqrt(A/2) =", math.sqrt(ermakov_A(c, beta, M) / 2))

# the squared least-favourable coefficients have the shape (lam - mu j^2b)_+
sp = solve_saddlepoint(AlternativeSpec.at_rate(beta, M, c, 1e6), 1e6)
j = np.arange(1, sp.cutoff_J + 1)
print(np.allclose(sp.g0, np.maximum(sp.lam - sp.mu * j ** (2 * beta), 0)))
