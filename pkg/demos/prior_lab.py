"""
Two Gaussian priors that a single test cannot separate
======================================================
"""

from sharpadapt import bivariate_lab

for hyp in ("Q0", "Q1", "Q2"):
    res = bivariate_lab(1.0, 2.0, beta=1.0, c=1.0, n=1e5, reps=4000, seed=5, hypothesis=hyp)
    print(hyp, "means", round(res.mean1, 3), round(res.mean2, 3), "target", res.target_mean)
    print("   corr", round(res.corr, 4), "limit", round(res.target_corr, 5), "finite n", round(res.finite_corr, 5))
