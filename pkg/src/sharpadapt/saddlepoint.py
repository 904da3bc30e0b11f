"""Least-favourable signal for quadratic tests and the closed-form constants.

The discrete problem minimises ``||g||`` over ``g >= 0`` subject to
``sum g_j = rho`` and ``sum j^{2 beta} g_j = M``.  Its solution is the
water-filling profile ``g_j = (lam - mu j^{2 beta})_+``.  For a fixed active
set ``{1, ..., J}`` both constraints are linear in ``(lam, mu)``, so the
solver scans candidate cutoffs, solves a 2x2 system for each and keeps the
one whose profile changes sign between ``J`` and ``J + 1``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleError, InvalidArgumentError
from .normal import normal_cdf, upper_quantile
from .sequence import AlternativeSpec, Signal

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SaddlePoint:
    """Solution ``(lam, mu, J, f0, d0, L0)`` of the discrete extremal problem.

    ``f0.squared[j-1] = (lam - mu j^{2 beta})_+`` for ``j <= cutoff_J``;
    ``d0 = f0^2 / ||f0^2||`` and ``L0 = n ||f0^2|| / sqrt(2)``.
    """

    spec: AlternativeSpec
    n: float
    lam: float
    mu: float
    cutoff_J: int
    f0: Signal
    d0: np.ndarray
    L0: float

    @property
    def g0(self):
        """Squared least-favourable coefficients ``f0_j^2``."""
        return self.f0.squared

    def constraint_residuals(self):
        """Relative residuals of the ball and ellipsoid constraints."""
        g = self.g0
        w = np.arange(1, g.size + 1, dtype=float) ** (2 * self.spec.beta)
        r_ball = (math.fsum(g) - self.spec.rho) / self.spec.rho
        r_ell = (math.fsum(w * g) - self.spec.M) / self.spec.M
        return r_ball, r_ell

    def active_set_margin(self):
        """``(lam - mu J^{2b}, lam - mu (J+1)^{2b})``; first >= 0 > second."""
        tb = 2 * self.spec.beta
        J = self.cutoff_J
        return self.lam - self.mu * J ** tb, self.lam - self.mu * (J + 1) ** tb


def _pow_ratio(j, scale, beta):
    return np.exp(2.0 * beta * (np.log(j) - math.log(scale)))


def _solve_fixed_cutoff(J, beta, rho, M, scale):
    """Exact 2x2 solve for active set ``1..J`` in units where ``j -> j/scale``.

    Returns ``(lam, mu_scaled, weights)`` with ``mu = mu_scaled * scale^{-2b}``.
    One step of iterative refinement on the fsum residuals keeps both
    constraints at the 1e-14 level.
    """
    j = np.arange(1, J + 1, dtype=float)
    w = _pow_ratio(j, scale, beta)
    M_s = M * math.exp(-2.0 * beta * math.log(scale))
    s0 = float(J)
    s1 = math.fsum(w)
    s2 = math.fsum(w * w)
    det = s0 * s2 - s1 * s1
    if not det > 0:
        return None
    lam = (rho * s2 - M_s * s1) / det
    mu = (rho * s1 - M_s * s0) / det
    for _ in range(2):
        g = lam - mu * w
        r1 = rho - math.fsum(g)
        r2 = M_s - math.fsum(w * g)
        lam += (r1 * s2 - r2 * s1) / det
        mu += (r1 * s1 - r2 * s0) / det
    return lam, mu, w


def _scan_cutoffs(beta, rho, M, J_max, scale):
    """Indices J in 2..J_max satisfying the active-set condition (float scan)."""
    j = np.arange(1, J_max + 2, dtype=float)
    w = _pow_ratio(j, scale, beta)
    M_s = M * math.exp(-2.0 * beta * math.log(scale))
    s0 = j[:-1]
    s1 = np.cumsum(w[:-1])
    s2 = np.cumsum(w[:-1] ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        det = s0 * s2 - s1 * s1
        lam = (rho * s2 - M_s * s1) / det
        mu = (rho * s1 - M_s * s0) / det
        ok = (
            (det > 0)
            & (mu > 0)
            & (lam - mu * w[:-1] >= 0)
            & (lam - mu * w[1:] < 0)
        )
    ok[0] = False
    return np.flatnonzero(ok) + 1


def _cutoff_guess(beta, rho, M):
    return math.exp((math.log(4 * beta + 1) + math.log(M) - math.log(rho)) / (2 * beta))


def solve_saddlepoint(spec, n):
    """Least-favourable pair ``(f0, d0)`` for ``spec`` truncated to ``j <= n``.

    Raises
    ------
    InfeasibleError
        If no cutoff ``1 <= J <= n`` yields positive multipliers, e.g. when
        ``M`` is so large that the ellipsoid constraint is inactive.
    """
    if not n >= 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n!r}")
    beta, M, rho = spec.beta, spec.M, spec.rho
    n_int = int(math.floor(n))
    tb = 2.0 * beta

    if M <= rho * (1 + 1e-12):
        # only rho * e_1 is feasible; multipliers taken as the J=2 limit
        x = 2.0 ** tb
        mu = rho / (x - 1.0)
        return _build(spec, n, rho + mu, mu, 1, np.array([rho]))

    guess = _cutoff_guess(beta, rho, M)
    J_cap = int(min(n_int, max(64, 4 * math.ceil(min(guess, 1e15)))))
    while True:
        found = _scan_cutoffs(beta, rho, M, J_cap, scale=J_cap)
        for J in _candidates(found, J_cap):
            sol = _solve_fixed_cutoff(J, beta, rho, M, scale=J)
            if sol is None:
                continue
            lam, mu_s, w = sol
            next_w = math.exp(tb * (math.log(J + 1) - math.log(J)))
            if mu_s > 0 and lam - mu_s * w[-1] >= 0 and lam - mu_s * next_w < 0:
                mu = mu_s * math.exp(-tb * math.log(J))
                g = np.maximum(lam - mu_s * w, 0.0)
                return _build(spec, n, lam, mu, J, g)
        if J_cap >= n_int:
            raise InfeasibleError(
                f"no active set J in 1..{n_int} gives positive multipliers for "
                f"beta={beta}, M={M}, rho={rho}; n is too small for this M/rho"
            )
        J_cap = min(n_int, 2 * J_cap)


def _candidates(found, J_cap):
    seen = []
    for J in found:
        for k in (J, J - 1, J + 1):
            if 2 <= k <= J_cap and k not in seen:
                seen.append(int(k))
    return seen


def _build(spec, n, lam, mu, J, g):
    norm_g = float(np.sqrt(np.sum(g * g)))
    d0 = g / norm_g
    d0.setflags(write=False)
    f0 = Signal.from_squares(g)
    return SaddlePoint(spec, n, lam, mu, int(J), f0, d0, n * norm_g / SQRT2)


def saddle_value(sp, n=None):
    """``L0 = n ||f0^2|| / sqrt(2)`` (``n`` defaults to the solve's ``n``)."""
    n = sp.n if n is None else n
    g = sp.g0
    return n * float(np.sqrt(np.sum(g * g))) / SQRT2


def finite_correlation(g1, g2):
    """``<g1, g2> / (||g1|| ||g2||)`` for two prior variance profiles."""
    m = max(g1.size, g2.size)
    a = np.zeros(m)
    b = np.zeros(m)
    a[: g1.size] = g1
    b[: g2.size] = g2
    return float(np.sum(a * b) / math.sqrt(np.sum(a * a) * np.sum(b * b)))


# --- closed-form constants ------------------------------------------------


def _check_beta(beta):
    if not (beta > 0 and math.isfinite(beta)):
        raise InvalidArgumentError(f"beta must be positive, got {beta!r}")


def ermakov_A0(beta):
    """``2 (2b+1) / (4b+1)^{1 + 1/(2b)}``."""
    _check_beta(beta)
    log_val = math.log(2 * (2 * beta + 1)) - (1 + 1 / (2 * beta)) * math.log(4 * beta + 1)
    return math.exp(log_val)


def ermakov_A(c, beta, M):
    """``A0(beta) M^{-1/(2 beta)} c^{2 + 1/(2 beta)}``, evaluated in logs."""
    _check_beta(beta)
    if not (c > 0 and M > 0):
        raise InvalidArgumentError("c and M must be positive")
    return math.exp(
        math.log(ermakov_A0(beta))
        - math.log(M) / (2 * beta)
        + (2 + 1 / (2 * beta)) * math.log(c)
    )


def ermakov_A1(beta):
    """``(A0(beta) / 2)^{-1/2}``."""
    return (ermakov_A0(beta) / 2) ** -0.5


def shape_energy(beta):
    """``K(beta) = int_0^1 (1 - t^{2 beta})^2 dt = 8 b^2 / ((2b+1)(4b+1))``."""
    _check_beta(beta)
    return 8 * beta ** 2 / ((2 * beta + 1) * (4 * beta + 1))


def asymptotic_type2(alpha, A):
    """Limiting worst-case type II error ``Phi(z_alpha - sqrt(A/2))``."""
    if A < 0:
        raise InvalidArgumentError("A must be nonnegative")
    z = upper_quantile(alpha)
    if math.isinf(A):
        return 0.0
    return float(normal_cdf(z - math.sqrt(A / 2)))


def correlation_r(M1, M2, beta):
    """Limiting correlation of the two prior-matched statistics."""
    _check_beta(beta)
    if not 0 < M1 <= M2:
        raise InvalidArgumentError("need 0 < M1 <= M2")
    q = M1 / M2
    return q ** (1 / (4 * beta)) * (4 * beta + 1 - q) / (4 * beta)


@dataclass(frozen=True)
class ContinuousSaddle:
    """Multipliers of the renormalised continuous problem.

    ``sigma2(x) = (lambda_star - mu_star x^{2 beta})_+`` integrates to one
    with and without the weight ``x^{2 beta}``.
    """

    beta: float
    lambda_star: float
    mu_star: float

    @property
    def cutoff(self):
        return (self.lambda_star / self.mu_star) ** (1 / (2 * self.beta))

    def sigma2(self, x):
        x = np.asarray(x, dtype=float)
        return np.maximum(self.lambda_star - self.mu_star * x ** (2 * self.beta), 0.0)

    def mass(self):
        """``int sigma2``, closed form."""
        X = self.cutoff
        b2 = 2 * self.beta
        return self.lambda_star * X - self.mu_star * X ** (b2 + 1) / (b2 + 1)

    def weighted_mass(self):
        """``int x^{2 beta} sigma2``, closed form."""
        X = self.cutoff
        b2 = 2 * self.beta
        return (
            self.lambda_star * X ** (b2 + 1) / (b2 + 1)
            - self.mu_star * X ** (2 * b2 + 1) / (2 * b2 + 1)
        )

    def l2_norm(self):
        """``||sigma2||_2``, closed form."""
        X = self.cutoff
        return self.lambda_star * math.sqrt(X * shape_energy(self.beta))

    def d_star(self, x):
        return self.sigma2(x) / self.l2_norm()


def continuous_saddlepoint(beta):
    """Closed-form ``(lambda*, mu*)``.

    With cutoff ``X = (lambda/mu)^{1/(2b)}`` the two integrals equal
    ``lambda X 2b/(2b+1)`` and ``lambda X^{2b+1} 2b/((2b+1)(4b+1))``; setting
    both to one gives ``X^{2b} = 4b + 1``.
    """
    _check_beta(beta)
    X = (4 * beta + 1) ** (1 / (2 * beta))
    lam = (2 * beta + 1) / (2 * beta * X)
    return ContinuousSaddle(beta, lam, lam / (4 * beta + 1))


def general_lambda_asymptotics(gamma, nu, L, M, P0, rho, n=1.0):
    """Corrected multiplier asymptotics for weights ``a_j = L j^{2 gamma}``,
    ``b_j = M j^{2 nu}`` with constraints ``sum a f^2 <= P0``,
    ``sum b f^2 >= rho``.

    Returns ``(lam, mu, A)`` where ``A`` carries the factor
    ``epsilon^{-4} = n^2``.
    """
    if not gamma > nu >= 0:
        raise InvalidArgumentError("need gamma > nu >= 0")
    if min(L, M, P0, rho, n) <= 0:
        raise InvalidArgumentError("L, M, P0, rho and n must be positive")
    gd = 2 * (gamma - nu)
    log_lam = (
        math.log((2 * gamma + 2 * nu + 1) / gd)
        + (4 * nu + 1) / gd * math.log(L / (P0 * (4 * gamma + 1)))
        + (4 * gamma + 1) / gd * math.log(1 / M)
        + (2 * (gamma + nu) + 1) / gd * math.log(rho * (4 * nu + 1))
    )
    lam = math.exp(log_lam)
    mu = (4 * nu + 1) * rho * lam / (P0 * (4 * gamma + 1))
    A = n ** 2 * rho * lam * (4 * gamma - 4 * nu) / (4 * gamma + 1)
    return lam, mu, A


def adaptive_radius(n, beta, M, D):
    """Radius with ``rho^{(4b+1)/(4b)} = A1(b) M^{1/(4b)} ((2 log log n)^{1/2} + D) / n``."""
    _check_beta(beta)
    if not n > math.e:
        raise InvalidArgumentError(f"n must exceed e so that log log n > 0, got {n!r}")
    if not M > 0:
        raise InvalidArgumentError("M must be positive")
    bracket = math.sqrt(2 * math.log(math.log(n))) + D
    if not bracket > 0:
        raise InfeasibleError(f"(2 log log n)^(1/2) + D = {bracket!r} is not positive")
    rhs = ermakov_A1(beta) * M ** (1 / (4 * beta)) * bracket / n
    return rhs ** (4 * beta / (4 * beta + 1))


def pinsker_constant(beta):
    """``(b/(b+1))^{2b/(2b+1)} (1+2b)^{1/(2b+1)}``."""
    _check_beta(beta)
    e = 2 * beta + 1
    return math.exp((2 * beta / e) * math.log(beta / (beta + 1)) + math.log(1 + 2 * beta) / e)
