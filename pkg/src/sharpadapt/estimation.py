"""Linear filters for estimating ``f`` over Sobolev ellipsoids.

Covers the Pinsker filter for known ``M``, the size-adaptive plug-in filter
built from an unbiased estimate of a biased size functional, and exact
risk evaluation for any linear filter.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleError, InvalidArgumentError
from .sequence import Signal

MAX_CUTOFF = 10 ** 8


@dataclass(frozen=True)
class LinearFilter:
    """Weights ``w_j`` in ``[0, 1]`` applied as ``w_j y_j``; zero past the stored length."""

    weights: np.ndarray
    n: float

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size < 1 or np.any(w < 0) or np.any(w > 1) or not np.all(np.isfinite(w)):
            raise InvalidArgumentError("filter weights must be finite and lie in [0, 1]")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    def apply(self, y):
        """Filtered estimate as a Signal of length ``len(self)``."""
        L = self.weights.size
        vals = np.zeros(L)
        m = min(L, len(y))
        vals[:m] = self.weights[:m] * np.asarray(y.y)[:m]
        return Signal(vals)


def _pinsker_mu_for(K, n, beta, M):
    j = np.arange(1, K + 1, dtype=float)
    a = j ** beta
    return math.fsum(a) / (math.fsum(a * a) + n * M), a


def pinsker_mu(n, beta, M):
    """Solve ``(1/n) sum_j j^b (1 - mu j^b)_+ = mu M``; returns ``(mu, cutoff)``.

    For a fixed cutoff ``K`` the equation is linear in ``mu``; the cutoff is
    the unique ``K`` with ``mu K^b <= 1 < mu (K+1)^b``.
    """
    if not (n > 0 and beta > 0 and M > 0):
        raise InvalidArgumentError("n, beta and M must be positive")
    approx = (beta / (n * M * (beta + 1) * (2 * beta + 1))) ** (beta / (2 * beta + 1))
    K_cap = int(min(MAX_CUTOFF, max(64, 4 * math.ceil(approx ** (-1 / beta)))))
    while True:
        j = np.arange(1, K_cap + 2, dtype=float)
        a = j ** beta
        mu = np.cumsum(a[:-1]) / (np.cumsum(a[:-1] ** 2) + n * M)
        ok = (mu * a[:-1] <= 1) & (mu * a[1:] > 1)
        for K in np.flatnonzero(ok) + 1:
            for k in (K, K - 1, K + 1):
                if k < 1:
                    continue
                m, ak = _pinsker_mu_for(int(k), n, beta, M)
                if m * ak[-1] <= 1 < m * (k + 1) ** beta:
                    return m, int(k)
        if K_cap >= MAX_CUTOFF:
            raise InfeasibleError(f"no Pinsker cutoff below {MAX_CUTOFF} for n={n}, beta={beta}, M={M}")
        K_cap = min(MAX_CUTOFF, 2 * K_cap)


def pinsker_filter(n, beta, M):
    """Minimax linear filter ``(1 - mu j^b)_+`` for known ``M``."""
    mu, K = pinsker_mu(n, beta, M)
    j = np.arange(1, K + 1, dtype=float)
    return LinearFilter(np.maximum(1.0 - mu * j ** beta, 0.0), n)


def pinsker_least_favorable(n, beta, M):
    """Signal with ``f_j^2 = n^{-1} (1/(mu j^b) - 1)_+``; attains ``Sigma(beta, M)`` with equality."""
    mu, K = pinsker_mu(n, beta, M)
    j = np.arange(1, K + 1, dtype=float)
    return Signal.from_squares(np.maximum(1.0 / (mu * j ** beta) - 1.0, 0.0) / n)


@dataclass(frozen=True)
class EstimationTuning:
    """Window ``N_tilde`` and bias ``gamma_n`` for the size estimate."""

    N_tilde: int
    gamma_n: float
    n: float
    beta: float


def default_estimation_tuning(n, beta):
    """``N_tilde = ceil(n^phi)`` with ``phi`` midway between ``1/(2b+1)`` and
    ``1/(2b+1/2)``; ``gamma_n = N_tilde^{2b+1/2} log(n) / n``."""
    phi = 0.5 * (1 / (2 * beta + 1) + 1 / (2 * beta + 0.5))
    Nt = int(math.ceil(n ** phi))
    gamma = Nt ** (2 * beta + 0.5) * math.log(n) / n
    return EstimationTuning(Nt, gamma, n, beta)


def golubev_alpha(beta):
    """``((b+1)(2b+1)/b)^{1/(2b+1)}``."""
    return ((beta + 1) * (2 * beta + 1) / beta) ** (1 / (2 * beta + 1))


def golubev_cutoff(M0, n, beta):
    """``N = alpha(b) (n M0)^{1/(2b+1)}``."""
    return golubev_alpha(beta) * (n * np.asarray(M0, dtype=float)) ** (1 / (2 * beta + 1))


def _shape_weights(N, J, beta):
    j = np.arange(1, J + 1, dtype=float)
    N = np.atleast_1d(np.asarray(N, dtype=float))
    return np.maximum(1.0 - (j[None, :] / N[:, None]) ** beta, 0.0)


def estimation_M0(f, beta, tuning):
    """``sum_{j <= N_tilde} j^{2b} f_j^2 + gamma_n``."""
    j = np.arange(1, tuning.N_tilde + 1, dtype=float)
    return float(np.sum(j ** (2 * beta) * f.padded(tuning.N_tilde) ** 2)) + tuning.gamma_n


def _M_hat_rows(Y, n, beta, tuning):
    Nt = tuning.N_tilde
    j = np.arange(1, Nt + 1, dtype=float)
    Yh = Y[..., :Nt]
    return np.sum(j ** (2 * beta) * (Yh * Yh - 1.0 / n), axis=-1) + tuning.gamma_n


def estimate_size(y, beta, tuning):
    """Unbiased estimate of :func:`estimation_M0` (unclamped)."""
    if len(y) < tuning.N_tilde:
        raise InvalidArgumentError(f"need at least N_tilde={tuning.N_tilde} observations")
    return float(_M_hat_rows(y.y, y.n, beta, tuning))


def golubev_oracle_filter(f, n, beta, tuning):
    """Filter ``(1 - (j/N)^b)_+`` with ``N`` from the true size functional."""
    N = float(golubev_cutoff(estimation_M0(f, beta, tuning), n, beta))
    J = max(int(math.floor(N)), 1)
    return LinearFilter(_shape_weights(N, J, beta)[0], n)


def golubev_adaptive_estimate(y, beta, tuning):
    """Plug-in estimate ``(1 - (j/N(M_hat))^b)_+ y_j``; never reads ``M``.

    ``M_hat`` is floored at ``gamma_n`` before computing the cutoff.
    """
    M_used = max(estimate_size(y, beta, tuning), tuning.gamma_n)
    N = float(golubev_cutoff(M_used, y.n, beta))
    J = max(int(math.floor(N)), 1)
    if J > len(y):
        raise InvalidArgumentError(f"filter support reaches j={J} but only {len(y)} observations were supplied")
    w = _shape_weights(N, J, beta)[0]
    return Signal(w * np.asarray(y.y)[:J])


def exact_filter_risk(f, w, n=None):
    """``(bias^2, variance, total)`` of ``w_j y_j`` as an estimate of ``f``.

    ``bias^2 = sum_j (1 - w_j)^2 f_j^2`` (``w_j = 0`` past the filter),
    ``variance = sum_j w_j^2 / n``.
    """
    n = w.n if n is None else n
    L = max(len(f), len(w))
    ww = np.zeros(L)
    ww[: len(w)] = w.weights
    g = f.padded(L) ** 2
    bias = float(np.sum((1.0 - ww) ** 2 * g))
    var = float(np.sum(w.weights ** 2)) / n
    return bias, var, bias + var


def worst_case_bias(w, beta, M):
    """``M max_j (1 - w_j)^2 j^{-2b}``, the bias supremum over ``Sigma(beta, M)``.

    Indices past the stored weights have ``w_j = 0``; among them ``j = L+1``
    dominates.
    """
    L = len(w)
    j = np.arange(1, L + 1, dtype=float)
    inside = float(np.max((1.0 - w.weights) ** 2 * j ** (-2 * beta)))
    return M * max(inside, (L + 1.0) ** (-2 * beta))


def worst_case_risk(w, beta, M):
    """Worst-case bias plus the (signal-free) variance."""
    return worst_case_bias(w, beta, M) + float(np.sum(w.weights ** 2)) / w.n


# --- harness-facing estimators -------------------------------------------


@dataclass(frozen=True)
class ZeroEstimator:
    def sample_estimates(self, sampler):
        return np.zeros((sampler.size, 1))


@dataclass(frozen=True)
class FilterEstimator:
    filter: LinearFilter

    def sample_estimates(self, sampler):
        w = self.filter.weights
        return w * sampler(w.size)


@dataclass(frozen=True)
class GolubevEstimator:
    beta: float
    tuning: EstimationTuning

    def sample_estimates(self, sampler):
        n = sampler.n
        Nt = self.tuning.N_tilde
        M_hat = np.maximum(_M_hat_rows(sampler(Nt), n, self.beta, self.tuning), self.tuning.gamma_n)
        N = golubev_cutoff(M_hat, n, self.beta)
        J = max(int(math.floor(float(np.max(N)))), 1)
        return _shape_weights(N, J, self.beta) * sampler(J)
