import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from sharpadapt import (
    AlternativeSpec, InfeasibleError, InvalidArgumentError, adaptive_radius, asymptotic_type2,
    continuous_saddlepoint, correlation_r, ermakov_A, ermakov_A0, ermakov_A1, finite_correlation,
    general_lambda_asymptotics, in_class_D, noncentrality_L, pinsker_constant, saddle_value,
    separation_radius, shape_energy, solve_saddlepoint,
)

mpmath.mp.dps = 40


def brute_force_cutoff(beta, M, rho, n):
    """Every active set 1..J, solved with a generic linear solver."""
    hits = []
    for J in range(2, n + 1):
        w = np.arange(1, J + 1, dtype=float) ** (2 * beta)
        A = np.array([[J, -w.sum()], [w.sum(), -(w * w).sum()]])
        lam, mu = np.linalg.solve(A, [rho, M])
        if mu > 0 and lam - mu * J ** (2 * beta) >= 0 and lam - mu * (J + 1) ** (2 * beta) < 0:
            hits.append((J, lam, mu))
    return hits


@pytest.mark.parametrize("beta,M,rho,n", [
    (1.0, 1.0, 0.01, 2000), (0.5, 2.0, 0.05, 2000), (2.0, 0.5, 0.002, 500), (1.5, 1.0, 0.1, 300),
])
def test_solver_matches_brute_force_enumeration(beta, M, rho, n):
    hits = brute_force_cutoff(beta, M, rho, n)
    # several cutoffs only when the profile vanishes exactly at an integer;
    # they then describe the same multipliers
    assert 1 <= len(hits) <= 2
    J, lam, mu = hits[0]
    for _, lam2, mu2 in hits[1:]:
        assert lam2 == pytest.approx(lam, rel=1e-10) and mu2 == pytest.approx(mu, rel=1e-10)
    sp = solve_saddlepoint(AlternativeSpec(beta, M, rho), n)
    assert sp.cutoff_J in [h[0] for h in hits]
    assert sp.lam == pytest.approx(lam, rel=1e-8)
    assert sp.mu == pytest.approx(mu, rel=1e-8)


def test_cutoff_example():
    sp = solve_saddlepoint(AlternativeSpec(1.0, 1.0, 0.01), 10_000)
    assert abs(sp.cutoff_J - math.floor(math.sqrt(500))) <= 1


@settings(max_examples=60, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.2, 5.0), st.floats(1e-4, 0.5), st.sampled_from([1e3, 1e4, 1e6]))
def test_constraints_and_active_set(beta, M, frac, n):
    spec = AlternativeSpec(beta, M, frac * M)
    try:
        sp = solve_saddlepoint(spec, n)
    except InfeasibleError:
        return
    r_ball, r_ell = sp.constraint_residuals()
    assert abs(r_ball) < 1e-10 and abs(r_ell) < 1e-10
    if sp.cutoff_J > 1:
        first, second = sp.active_set_margin()
        assert first >= 0 > second
    assert np.sum(sp.d0 ** 2) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(sp.d0, sp.g0 / np.linalg.norm(sp.g0), rtol=1e-13)
    assert sp.L0 == pytest.approx(n * np.linalg.norm(sp.g0) / math.sqrt(2), rel=1e-13)


def test_single_coefficient_case():
    sp = solve_saddlepoint(AlternativeSpec(1.0, 0.3, 0.3), 100)
    assert sp.cutoff_J == 1
    assert sp.lam - sp.mu == pytest.approx(0.3, rel=1e-14)
    assert saddle_value(sp) == pytest.approx(100 * 0.3 / math.sqrt(2), rel=1e-14)


def test_infeasible_when_n_too_small():
    with pytest.raises(InfeasibleError):
        solve_saddlepoint(AlternativeSpec(1.0, 100.0, 1e-6), 20)
    with pytest.raises(InvalidArgumentError):
        solve_saddlepoint(AlternativeSpec(1.0, 1.0, 0.1), 0)


def test_saddle_value_limit_and_monotone_in_M():
    n = 1e6
    sp = solve_saddlepoint(AlternativeSpec.at_rate(1.0, 1.0, 1.0, n), n)
    assert abs(sp.L0 / math.sqrt(ermakov_A(1.0, 1.0, 1.0) / 2) - 1) < 0.05
    rho = separation_radius(1.0, n, 1.0)
    values = [solve_saddlepoint(AlternativeSpec(1.0, M, rho), n).L0 for M in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_L0_convergence_trend():
    for beta, M, c in [(1.0, 1.0, 1.0), (0.5, 2.0, 0.5), (2.0, 0.5, 2.0)]:
        ratios = []
        for n in (1e3, 1e4, 1e5, 1e6):
            try:
                sp = solve_saddlepoint(AlternativeSpec.at_rate(beta, M, c, n), n)
            except InfeasibleError:
                assert not ratios, "feasibility must persist once reached"
                continue
            ratios.append(abs(sp.L0 / math.sqrt(ermakov_A(c, beta, M) / 2) - 1))
        assert all(a >= b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < 0.05


def test_ermakov_constants_against_high_precision():
    assert ermakov_A0(1.0) == pytest.approx(float(6 * mpmath.mpf(5) ** mpmath.mpf(-1.5)), rel=1e-14)
    assert ermakov_A0(1.0) == pytest.approx(0.536656, abs=5e-7)
    assert ermakov_A0(0.5) == pytest.approx(4 / 9, rel=1e-14)
    grid = [ermakov_A0(b) for b in (0.5, 1, 2, 4, 8, 16, 64, 256)]
    assert all(a < b for a, b in zip(grid, grid[1:]))
    assert grid[-1] < 1 and grid[-1] > 0.98
    with pytest.raises(InvalidArgumentError):
        ermakov_A0(0.0)


@given(st.floats(0.2, 4.0), st.floats(0.05, 20.0), st.floats(0.05, 20.0))
def test_ermakov_A_scaling(beta, c, M):
    assert ermakov_A(1.0, beta, 1.0) == pytest.approx(ermakov_A0(beta), rel=1e-13)
    assert ermakov_A(1.1 * c, beta, M) > ermakov_A(c, beta, M)
    assert ermakov_A(c, beta, 1.1 * M) < ermakov_A(c, beta, M)
    exact = ermakov_A0(beta) * M ** (-1 / (2 * beta)) * c ** (2 + 1 / (2 * beta))
    assert ermakov_A(c, beta, M) == pytest.approx(exact, rel=1e-12)


def mp_type2(alpha, A):
    z = -mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(alpha) - 1)
    return float(mpmath.ncdf(z - mpmath.sqrt(mpmath.mpf(A) / 2)))


def test_asymptotic_type2():
    assert asymptotic_type2(0.05, 0.0) == pytest.approx(0.95, abs=1e-12)
    assert asymptotic_type2(0.05, 2.0) == pytest.approx(mp_type2(0.05, 2.0), abs=1e-9)
    assert asymptotic_type2(0.05, 2.0) == pytest.approx(0.74049, abs=5e-6)
    assert asymptotic_type2(0.05, 1e6) < 1e-100
    assert asymptotic_type2(0.05, math.inf) == 0.0
    for alpha in (1e-8, 0.01, 0.3, 0.9):
        for A in (0.1, 1.0, 7.0):
            assert asymptotic_type2(alpha, A) == pytest.approx(mp_type2(alpha, A), abs=1e-9)
    with pytest.raises(InvalidArgumentError):
        asymptotic_type2(1.5, 1.0)
    with pytest.raises(InvalidArgumentError):
        asymptotic_type2(0.05, -1.0)


def test_correlation_r():
    assert correlation_r(1.0, 1.0, 1.3) == 1.0
    assert correlation_r(1.0, 2.0, 1.0) == pytest.approx(2 ** -0.25 * 4.5 / 4, rel=1e-14)
    assert correlation_r(1.0, 2.0, 1.0) == pytest.approx(0.94600, abs=1e-5)
    with pytest.raises(InvalidArgumentError):
        correlation_r(2.0, 1.0, 1.0)


@given(st.floats(0.01, 0.999), st.floats(0.2, 4.0))
def test_correlation_in_unit_interval(q, beta):
    r = correlation_r(q, 1.0, beta)
    assert 0 < r < 1


def test_finite_correlation_brute_force():
    n = 1e6
    rho = separation_radius(1.0, n, 1.0)
    g1 = solve_saddlepoint(AlternativeSpec(1.0, 1.0, rho), n).g0
    g2 = solve_saddlepoint(AlternativeSpec(1.0, 2.0, rho), n).g0
    num = sum(a * b for a, b in zip(g1, g2))
    brute = num / math.sqrt(sum(a * a for a in g1) * sum(b * b for b in g2))
    assert finite_correlation(g1, g2) == pytest.approx(brute, rel=1e-12)
    assert abs(brute / correlation_r(1.0, 2.0, 1.0) - 1) < 0.01


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_continuous_saddle_by_quadrature(beta):
    cs = continuous_saddlepoint(beta)
    X = cs.cutoff
    assert 0 < X < math.inf
    mass = quad(lambda x: cs.lambda_star - cs.mu_star * x ** (2 * beta), 0, X, epsabs=1e-13, epsrel=1e-13)[0]
    wmass = quad(lambda x: x ** (2 * beta) * (cs.lambda_star - cs.mu_star * x ** (2 * beta)), 0, X,
                 epsabs=1e-13, epsrel=1e-13)[0]
    sq = quad(lambda x: (cs.lambda_star - cs.mu_star * x ** (2 * beta)) ** 2, 0, X,
              epsabs=1e-13, epsrel=1e-13)[0]
    assert abs(mass - 1) < 1e-10 and abs(wmass - 1) < 1e-10
    assert abs(cs.mass() - 1) < 1e-12 and abs(cs.weighted_mass() - 1) < 1e-12
    assert abs(math.sqrt(sq) - math.sqrt(ermakov_A0(beta))) < 1e-8
    assert abs(cs.l2_norm() - math.sqrt(ermakov_A0(beta))) < 1e-12
    assert quad(lambda x: cs.d_star(x) ** 2, 0, X)[0] == pytest.approx(1.0, rel=1e-10)


def test_shape_energy_matches_integral():
    for beta in (0.5, 1.0, 3.0):
        val = quad(lambda t: (1 - t ** (2 * beta)) ** 2, 0, 1)[0]
        assert shape_energy(beta) == pytest.approx(val, rel=1e-12)
    assert shape_energy(1.0) == pytest.approx(8 / 15, rel=1e-15)


@pytest.mark.parametrize("beta,M,rho,n", [(1.0, 1.0, 1e-3, 1e5), (0.5, 2.0, 0.01, 1e4), (2.0, 3.0, 1e-4, 1e6)])
def test_general_asymptotics_specialisation(beta, M, rho, n):
    lam, mu, A = general_lambda_asymptotics(beta, 0.0, 1.0, 1.0, M, rho, n)
    target = ermakov_A0(beta) * M ** (-1 / (2 * beta)) * rho ** (2 + 1 / (2 * beta)) * n ** 2
    assert abs(A / target - 1) < 1e-6
    assert lam > 0 and mu > 0
    # the cutoff (lam/mu)^{1/(2 gamma)} is where the profile vanishes; mu < lam there
    assert mu < lam


def test_general_asymptotics_errors():
    with pytest.raises(InvalidArgumentError):
        general_lambda_asymptotics(1.0, 1.0, 1, 1, 1, 1)
    with pytest.raises(InvalidArgumentError):
        general_lambda_asymptotics(1.0, 0.0, 1, 1, -1, 1)


def test_adaptive_radius():
    assert ermakov_A1(1.0) == pytest.approx(float((mpmath.mpf(6) * mpmath.mpf(5) ** -1.5 / 2) ** -0.5), rel=1e-14)
    n, beta, M = 1e6, 1.0, 2.0
    D = 1 / (ermakov_A1(beta) * M ** (1 / (4 * beta))) - math.sqrt(2 * math.log(math.log(n)))
    assert adaptive_radius(n, beta, M, D) == pytest.approx(n ** (-4 * beta / (4 * beta + 1)), rel=1e-12)
    values = [adaptive_radius(n, beta, M, d) for d in (-1.0, 0.0, 1.0, 5.0)]
    assert all(a < b for a, b in zip(values, values[1:]))
    with pytest.raises(InvalidArgumentError):
        adaptive_radius(2.0, beta, M, 0.0)
    with pytest.raises(InfeasibleError):
        adaptive_radius(n, beta, M, -100.0)


def test_pinsker_constant():
    assert pinsker_constant(1.0) == pytest.approx(float(mpmath.cbrt(mpmath.mpf(3) / 4)), rel=1e-14)
    assert pinsker_constant(1.0) == pytest.approx(0.90856, abs=5e-6)
    assert pinsker_constant(0.5) == pytest.approx(math.sqrt(2 / 3), rel=1e-14)
    # overshoots 1 near beta = 10, then decays back toward it
    gaps = [abs(pinsker_constant(b) - 1) for b in (16, 64, 256, 1024, 4096)]
    assert all(a > b for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-3


# --- saddle inequality ----------------------------------------------------


def sample_d_in_class(rng, J, n, rho):
    """Nonnegative unit vector spread enough to satisfy the sup-norm cap."""
    cap = 1 / (math.log(n) * n * rho)
    while True:
        d = rng.uniform(0.5, 1.0, size=J) * (rng.uniform(size=J) < 0.9)
        d /= np.linalg.norm(d)
        if np.max(d * d) <= cap:
            return d


def sample_shell_point(rng, spec, support):
    """Squares ``g >= 0`` with ``rho <= sum g <= 2 rho`` and Sobolev norm <= M."""
    w = np.arange(1, support + 1, dtype=float) ** (2 * spec.beta)
    s = rng.uniform(1.0, 2.0) * spec.rho
    g = rng.exponential(size=support)
    g *= s / g.sum()
    h = np.zeros(support)
    h[0] = s
    # shrink toward the cheap point s e_1 until the ellipsoid constraint holds
    sob_g, sob_h = float(w @ g), float(w @ h)
    t = 1.0 if sob_g <= spec.M else (spec.M - sob_h) / (sob_g - sob_h)
    return t * g + (1 - t) * h


def test_saddle_inequality_sampling():
    n = 1e6
    spec = AlternativeSpec.at_rate(1.0, 1.0, 1.0, n)
    sp = solve_saddlepoint(spec, n)
    J = sp.cutoff_J
    rng = np.random.default_rng(2024)
    for _ in range(200):
        d = sample_d_in_class(rng, 4 * J, n, spec.rho)
        assert in_class_D(d, n, spec.rho)
        assert noncentrality_L(d, sp.f0, n) <= sp.L0 + 1e-8
    for _ in range(200):
        g = sample_shell_point(rng, spec, 3 * J)
        w = np.arange(1, g.size + 1, dtype=float) ** 2
        assert spec.rho * (1 - 1e-12) <= g.sum() <= 2 * spec.rho * (1 + 1e-12)
        assert w @ g <= spec.M * (1 + 1e-12)
        assert sp.L0 <= noncentrality_L(sp.d0, np.sqrt(g), n) + 1e-8
