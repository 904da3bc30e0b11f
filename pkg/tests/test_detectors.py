import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpadapt import (
    AlternativeSpec, DegenerateError, InvalidArgumentError, Observations, QuadraticTest, Signal,
    ermakov_test, in_class_D, neyman_pearson_check, noncentrality_L, normal_cdf,
    quadratic_statistic, solve_saddlepoint, upper_quantile,
)
from sharpadapt.harness import sample_statistics


def gauss_hermite_moments(d, n):
    """Exact E T and Var T under f = 0 by tensor Gauss-Hermite quadrature."""
    x, w = np.polynomial.hermite_e.hermegauss(8)
    w = w / w.sum()
    m1 = m2 = 0.0
    for idx in itertools.product(range(x.size), repeat=d.size):
        xi = x[list(idx)]
        weight = np.prod(w[list(idx)])
        y = xi / math.sqrt(n)
        t = quadratic_statistic(Observations(y, n), d)
        m1 += weight * t
        m2 += weight * t * t
    return m1, m2 - m1 * m1


unit_vectors = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=3).filter(
    lambda v: sum(a * a for a in v) > 1e-6
).map(lambda v: np.asarray(v) / np.linalg.norm(v))


@settings(max_examples=15, deadline=None)
@given(unit_vectors, st.floats(1.0, 1e4))
def test_exact_null_standardisation_small_J(d, n):
    m, v = gauss_hermite_moments(d, n)
    assert abs(m) < 1e-9
    assert v == pytest.approx(1.0, abs=1e-9)


def test_statistic_shapes():
    d = np.array([0.6, 0.8])
    y = Observations(np.zeros(3), 50)
    assert quadratic_statistic(y, d) == pytest.approx(-(0.6 + 0.8) / math.sqrt(2), rel=1e-15)
    y = Observations([0.3, 1.0], 50)
    assert quadratic_statistic(y, [1.0]) == pytest.approx((50 * 0.09 - 1) / math.sqrt(2), rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        quadratic_statistic(y, [0.5, 0.5])
    with pytest.raises(InvalidArgumentError):
        quadratic_statistic(y, [0.6, 0.0, 0.8])


def test_null_moments_monte_carlo():
    J, reps = 10_000, 10_000
    test = QuadraticTest.with_level(np.full(J, 1 / math.sqrt(J)), 0.05, 1e4)
    T = sample_statistics(test, None, 1e4, reps, seed=5)
    sd = T.std(ddof=1)
    assert abs(T.mean()) <= 3 * sd / math.sqrt(reps)
    var_se = math.sqrt(np.mean((T - T.mean()) ** 4) - T.var() ** 2) / math.sqrt(reps)
    assert abs(T.var(ddof=1) - 1) <= 3 * var_se


def test_class_D():
    n, rho = 1e6, 1e-3
    assert not in_class_D(np.array([1.0]), n, rho)
    J = int(n * rho * math.log(n)) + 10
    assert in_class_D(np.full(J, 1 / math.sqrt(J)), n, rho)
    sp = solve_saddlepoint(AlternativeSpec.at_rate(1.0, 1.0, 1.0, 1e6), 1e6)
    assert in_class_D(sp.d0, 1e6, sp.spec.rho)


def test_class_D_scale_trend_for_saddle_coefficients():
    """``n rho max d0^2 log n`` shrinks along n and drops below 1."""
    vals = []
    for n in (1e4, 1e5, 1e6, 1e7):
        sp = solve_saddlepoint(AlternativeSpec.at_rate(1.0, 1.0, 1.0, n), n)
        vals.append(n * sp.spec.rho * float(np.max(sp.d0 ** 2)) * math.log(n))
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1 and vals[-2] < 1


def test_noncentrality_identities():
    n = 1e5
    sp = solve_saddlepoint(AlternativeSpec.at_rate(1.0, 1.0, 1.0, n), n)
    assert noncentrality_L(sp.d0, Signal.zeros(3), n) == 0.0
    assert noncentrality_L(sp.d0, sp.f0, n) == pytest.approx(sp.L0, rel=1e-10)


def test_shifted_statistic_mean_matches_noncentrality():
    n = 1e5
    spec = AlternativeSpec.at_rate(1.0, 1.0, 1.0, n)
    sp = solve_saddlepoint(spec, n)
    test = ermakov_test(spec, n, 0.05)
    # a shell point away from f0: push 30% of the mass to the first coordinate
    g = 0.7 * sp.g0.copy()
    g[0] += 0.3 * spec.rho * 1.5
    f = Signal.from_squares(g)
    T = sample_statistics(test, f, n, 10_000, seed=9)
    shift = T - noncentrality_L(test.d, f, n)
    assert abs(shift.mean()) <= 3 * shift.std(ddof=1) / math.sqrt(T.size)


def test_ermakov_test_object():
    n = 1e5
    spec = AlternativeSpec.at_rate(1.0, 1.0, 1.0, n)
    test = ermakov_test(spec, n, 0.05)
    sp = solve_saddlepoint(spec, n)
    np.testing.assert_array_equal(test.d, sp.d0)
    assert test.threshold == pytest.approx(1.6448536269514722, abs=1e-12)
    assert test.predicted_type2 == pytest.approx(float(normal_cdf(test.threshold - sp.L0)), rel=1e-15)
    y = Observations(sp.f0.padded(sp.cutoff_J + 5), n)
    reject, t = test(y)
    assert t == pytest.approx(sp.L0 - np.sum(sp.d0) / math.sqrt(2), rel=1e-12)
    assert reject == (t > test.threshold)


def test_quadratic_test_validation():
    with pytest.raises(InvalidArgumentError):
        QuadraticTest(np.array([0.5, 0.5]), 1.0, 0.05, 10)
    with pytest.raises(InvalidArgumentError):
        QuadraticTest(np.array([-0.6, 0.8]), 1.0, 0.05, 10)
    with pytest.raises(InvalidArgumentError):
        upper_quantile(0.0)


@pytest.mark.xfail(strict=True, reason="drift at n=1e6 is 0.036; it decays like n^(-1/5) (see ledger)")
def test_neyman_pearson_drift_one_percent_at_1e6():
    n = 1e6
    sp = solve_saddlepoint(AlternativeSpec.at_rate(1.0, 1.0, 1.0, n), n)
    assert neyman_pearson_check(sp.g0, n)[1] <= 0.01


def test_neyman_pearson_drift_decays():
    drifts = []
    for n in (1e4, 1e6, 1e8, 1e10):
        sp = solve_saddlepoint(AlternativeSpec.at_rate(1.0, 1.0, 1.0, n), n)
        drift = neyman_pearson_check(sp.g0, n)[1]
        # first order: d_j / d0_j is proportional to 1 / (1 + n f0_j^2)
        assert drift <= n * sp.lam
        drifts.append(drift)
    assert all(a > b for a, b in zip(drifts, drifts[1:]))
    assert drifts[-1] <= 0.01


def test_neyman_pearson_direction():
    n = 1e6
    sp = solve_saddlepoint(AlternativeSpec.at_rate(1.0, 1.0, 1.0, n), n)
    d, drift = neyman_pearson_check(sp.g0, n)
    assert np.sum(d * d) == pytest.approx(1.0, abs=1e-12)
    d_sig, drift_sig = neyman_pearson_check(Signal(sp.g0), n)
    np.testing.assert_array_equal(d, d_sig)
    with pytest.raises(DegenerateError):
        neyman_pearson_check(np.zeros(4), n)
    d, _ = neyman_pearson_check(np.array([0.0, 0.3, 0.0]), 10)
    np.testing.assert_allclose(d, [0.0, 1.0, 0.0], atol=1e-15)


def test_worst_case_monotone_along_scaling():
    n = 1e5
    spec = AlternativeSpec.at_rate(1.0, 1.0, 1.0, n)
    test = ermakov_test(spec, n, 0.05)
    f0 = solve_saddlepoint(spec, n).f0
    rates = []
    for t in (1.0, 1.1, 1.25, 1.5, 2.0):
        T = sample_statistics(test, f0.scaled(t), n, 4000, seed=13)
        rates.append(float(np.mean(T <= test.threshold)))
    assert all(a >= b for a, b in zip(rates, rates[1:]))
