"""Size-adaptive quadratic test for fixed smoothness.

The test never sees the ellipsoid size ``M``.  It estimates a biased size
functional ``M0(f) = sum_{j <= Nt} j^{2b} f_j^2 + gamma`` by

    M_hat = sum_{j <= Nt} (y_j^2 - 1/n) j^{2b} + gamma,

and plugs it into the triangular-power weights
``(1 - (j/N)^{2b})_+`` with ``N = ((4b+1) M / rho)^{1/(2b)}``.  The
normalising prefactor of those weights cancels in the standardised
statistic and is omitted.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError, TuningInfeasibleError
from .normal import upper_quantile
from .saddlepoint import SQRT2, ermakov_A, solve_saddlepoint
from .sequence import Observations, Signal, separation_radius


@dataclass(frozen=True)
class Tuning:
    """Tuning sequences ``(c_n, gamma_n, N_tilde, tau)`` at sample size ``n``.

    Construction enforces
    ``gamma_n^{1/(2b)} n^{2/(4b+1)} > N_tilde > c_n^{-1/(2b)} n^{2/(4b+1)}``.
    """

    c_n: float
    gamma_n: float
    N_tilde: int
    tau: float
    n: float
    beta: float

    def __post_init__(self):
        if not (self.c_n > 0 and self.gamma_n > 0 and self.N_tilde >= 1):
            raise InvalidArgumentError("c_n, gamma_n must be positive and N_tilde >= 1")
        if not 0 < self.tau < 1:
            raise InvalidArgumentError("tau must lie in (0, 1)")
        lower, upper = self.bounds
        if not lower < self.N_tilde < upper:
            raise TuningInfeasibleError(
                f"N_tilde={self.N_tilde} violates {lower:.6g} < N_tilde < {upper:.6g} "
                f"(c_n={self.c_n:.6g}, gamma_n={self.gamma_n:.6g}, n={self.n:.6g})"
            )

    @property
    def bounds(self):
        b2 = 2.0 * self.beta
        base = self.n ** (2.0 / (4.0 * self.beta + 1.0))
        return self.c_n ** (-1.0 / b2) * base, self.gamma_n ** (1.0 / b2) * base


def default_tuning(c_n, n, beta, tau=0.9):
    """``gamma_n = c_n^{-1/2}``, ``N_tilde = ceil(c_n^{-1/(3b)} n^{2/(4b+1)})``."""
    if not c_n > 0:
        raise InvalidArgumentError("c_n must be positive")
    N_tilde = int(math.ceil(c_n ** (-1.0 / (3.0 * beta)) * n ** (2.0 / (4.0 * beta + 1.0))))
    return Tuning(c_n, c_n ** -0.5, N_tilde, tau, n, beta)


def _index_weights(J, beta):
    return np.arange(1, J + 1, dtype=float) ** (2.0 * beta)


def oracle_M0(f, beta, tuning):
    """``sum_{j <= N_tilde} j^{2b} f_j^2 + gamma_n``."""
    g = f.padded(tuning.N_tilde) ** 2
    return float(np.sum(_index_weights(tuning.N_tilde, beta) * g)) + tuning.gamma_n


def _estimate_M_rows(Y, n, beta, tuning):
    Nt = tuning.N_tilde
    Yh = Y[..., :Nt]
    return np.sum((Yh * Yh - 1.0 / n) * _index_weights(Nt, beta), axis=-1) + tuning.gamma_n


def estimate_M(y, beta, tuning):
    """Unbiased estimate of ``oracle_M0``; returned unclamped (may be < gamma_n)."""
    if len(y) < tuning.N_tilde:
        raise InvalidArgumentError(f"need at least N_tilde={tuning.N_tilde} observations, got {len(y)}")
    return float(_estimate_M_rows(y.y, y.n, beta, tuning))


def estimate_M_variance(f, beta, tuning, n):
    """``Var(M_hat) = sum_{j <= N_tilde} (2/n^2 + 4 f_j^2 / n) j^{4b}``."""
    g = f.padded(tuning.N_tilde) ** 2
    w = _index_weights(tuning.N_tilde, beta)
    return float(np.sum((2.0 / n ** 2 + 4.0 * g / n) * w * w))


@dataclass(frozen=True)
class SizeEstimateProbe:
    """Harness adapter returning raw ``M_hat`` per replicate (no test decision)."""

    beta: float
    tuning: Tuning
    threshold: float = math.inf

    def sample_statistics(self, sampler):
        return _estimate_M_rows(sampler(self.tuning.N_tilde), sampler.n, self.beta, self.tuning)


def clamped_M(M_hat, tuning):
    """``max(M_hat, gamma_n)``: the value the tests feed into the cutoff."""
    return np.maximum(M_hat, tuning.gamma_n)


def cutoff_N(M_used, rho, beta):
    """``N(M) = ((4b+1) M / rho)^{1/(2b)}``."""
    return ((4.0 * beta + 1.0) * np.asarray(M_used, dtype=float) / rho) ** (1.0 / (2.0 * beta))


@dataclass(frozen=True)
class AdaptiveCoefficients:
    M_used: float
    N_cut: float
    d_tilde: np.ndarray


def adaptive_coefficients(M_used, rho, beta):
    """Unnormalised weights ``(1 - (j/N)^{2b})_+`` for ``j = 1..floor(N)``."""
    if not (M_used > 0 and rho > 0):
        raise InvalidArgumentError("M_used and rho must be positive")
    N = float(cutoff_N(M_used, rho, beta))
    if N < 1:
        raise InvalidArgumentError(f"cutoff N={N:.6g} < 1 leaves no active coefficient")
    j = np.arange(1, int(math.floor(N)) + 1, dtype=float)
    d = np.maximum(1.0 - (j / N) ** (2.0 * beta), 0.0)
    d.setflags(write=False)
    return AdaptiveCoefficients(float(M_used), N, d)


def _weights_rows(N, J, beta):
    """``(R, J)`` matrix of ``(1 - (j/N_r)^{2b})_+``."""
    j = np.arange(1, J + 1, dtype=float)
    N = np.atleast_1d(np.asarray(N, dtype=float))
    return np.maximum(1.0 - (j[None, :] / N[:, None]) ** (2.0 * beta), 0.0)


def _normalized_rows(Y, n, W):
    """``sum w (n y^2 - 1) / sqrt(2 sum w^2)`` row by row."""
    J = W.shape[-1]
    Yk = Y[..., :J]
    num = np.sum(W * (n * Yk * Yk - 1.0), axis=-1)
    return num / (SQRT2 * np.sqrt(np.sum(W * W, axis=-1)))


def _required_dim(N):
    return int(math.floor(float(np.max(N))))


def _stat_from_cutoff(y, N, beta):
    J = _required_dim(N)
    if J > len(y):
        raise InvalidArgumentError(
            f"weights extend to j={J} but only {len(y)} observations were supplied"
        )
    W = _weights_rows(N, J, beta)
    return float(_normalized_rows(y.y[None, :], y.n, W)[0])


def oracle_statistic(y, f, spec, tuning):
    """Statistic with weights built from the true ``M0(f)``."""
    N = cutoff_N(oracle_M0(f, spec.beta, tuning), spec.rho, spec.beta)
    return _stat_from_cutoff(y, N, spec.beta)


def adaptive_statistic(y, rho, beta, tuning):
    """Plug-in statistic: ``M_hat`` and the quadratic form share ``y``."""
    M_used = clamped_M(estimate_M(y, beta, tuning), tuning)
    return _stat_from_cutoff(y, cutoff_N(M_used, rho, beta), beta)


def split_levels(n, tau):
    """Noise levels ``(tau n, (1 - tau) n)`` of the two independent halves."""
    return tau * n, (1.0 - tau) * n


def split_adaptive_statistic(y1, y2, rho, beta, tuning):
    """``M_hat`` from ``y2`` only, quadratic form from ``y1`` only.

    ``y1`` and ``y2`` must be observations of the same signal at levels
    ``tau n`` and ``(1 - tau) n``; each is standardised at its own level so
    that, given ``y2``, the statistic has mean 0 and variance 1 under
    ``f = 0``.
    """
    if len(y1) != len(y2):
        raise InvalidArgumentError(f"split samples differ in length: {len(y1)} vs {len(y2)}")
    M_used = clamped_M(estimate_M(y2, beta, tuning), tuning)
    return _stat_from_cutoff(y1, cutoff_N(M_used, rho, beta), beta)


def adaptive_test(y, rho, beta, alpha, tuning, mode="plug_in"):
    """``(reject, statistic)`` for the size-adaptive test.

    ``y`` is an :class:`Observations` for ``mode="plug_in"`` and a pair
    ``(y1, y2)`` for ``mode="split"``.  There is no ``M`` argument.
    """
    if mode == "plug_in":
        if not isinstance(y, Observations):
            raise InvalidArgumentError("plug_in mode takes a single Observations")
        t = adaptive_statistic(y, rho, beta, tuning)
    elif mode == "split":
        y1, y2 = y
        t = split_adaptive_statistic(y1, y2, rho, beta, tuning)
    else:
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    return t > upper_quantile(alpha), t


@dataclass(frozen=True)
class AdaptiveTest:
    """Harness-facing form of :func:`adaptive_test`."""

    rho: float
    beta: float
    alpha: float
    tuning: Tuning
    mode: str = "plug_in"

    def __post_init__(self):
        if self.mode not in ("plug_in", "split"):
            raise InvalidArgumentError(f"unknown mode {self.mode!r}")

    @property
    def threshold(self):
        return upper_quantile(self.alpha)

    def sample_statistics(self, sampler):
        Nt = self.tuning.N_tilde
        if self.mode == "plug_in":
            n = sampler.n
            M_hat = _estimate_M_rows(sampler(Nt), n, self.beta, self.tuning)
            N = cutoff_N(clamped_M(M_hat, self.tuning), self.rho, self.beta)
            J = _required_dim(N)
            Y = sampler(max(J, Nt))
            return _normalized_rows(Y, n, _weights_rows(N, J, self.beta))
        n1, n2 = split_levels(sampler.n, self.tuning.tau)
        M_hat = _estimate_M_rows(sampler(Nt, stream=2, level=n2), n2, self.beta, self.tuning)
        N = cutoff_N(clamped_M(M_hat, self.tuning), self.rho, self.beta)
        J = _required_dim(N)
        Y1 = sampler(J, stream=1, level=n1)
        return _normalized_rows(Y1, n1, _weights_rows(N, J, self.beta))


@dataclass(frozen=True)
class OracleTest:
    """Test with weights from the true ``M0(f)``; a benchmark, not a procedure."""

    f: Signal
    rho: float
    beta: float
    alpha: float
    tuning: Tuning

    @property
    def threshold(self):
        return upper_quantile(self.alpha)

    def sample_statistics(self, sampler):
        N = cutoff_N(oracle_M0(self.f, self.beta, self.tuning), self.rho, self.beta)
        J = _required_dim(N)
        return _normalized_rows(sampler(J), sampler.n, _weights_rows(N, J, self.beta))


def noncentrality(f, rho, beta, M0, n):
    """``n sum_j f_j^2 w_j / sqrt(2 sum w_j^2)`` with weights at ``N(M0)``.

    This is the exact mean of the oracle statistic at ``f``.
    """
    N = float(cutoff_N(M0, rho, beta))
    J = max(_required_dim(N), 1)
    w = _weights_rows(N, J, beta)[0]
    g = f.padded(J) ** 2
    return n * float(np.sum(w * g)) / (SQRT2 * math.sqrt(float(np.sum(w * w))))


def noncentrality_lower_bound(spec, c_n, n, tuning=None):
    """Exact finite-``n`` noncentrality at ``f0`` and its ratio to the limit.

    ``spec.rho`` must equal ``c_n n^{-4b/(4b+1)}``.  Returns
    ``(L_n, ratio)`` with ratio ``L_n / sqrt(A(c_n, beta, M) / 2)``.
    """
    expected_rho = separation_radius(c_n, n, spec.beta)
    if abs(spec.rho / expected_rho - 1.0) > 1e-9:
        raise InvalidArgumentError(f"spec.rho={spec.rho!r} does not match c_n n^(-4b/(4b+1))={expected_rho!r}")
    if tuning is None:
        tuning = default_tuning(c_n, n, spec.beta)
    f0 = solve_saddlepoint(spec, n).f0
    L_n = noncentrality(f0, spec.rho, spec.beta, oracle_M0(f0, spec.beta, tuning), n)
    target = math.sqrt(ermakov_A(c_n, spec.beta, spec.M) / 2.0)
    return L_n, L_n / target
