"""Deterministic Monte Carlo for sizes, type II errors, risks and the prior lab.

Replicates are cut into fixed chunks of ``CHUNK`` consecutive indices.  Each
chunk is evaluated independently from counter-based draws, the per-replicate
outputs are concatenated in replicate order and only then reduced.  The
worker count therefore changes wall time but never a single bit of output.

Tests and estimators talk to the harness through a lazy sampler:
``sampler(J, stream=0, level=None)`` returns the ``(R, J)`` observation
matrix of the chunk, ``sampler.n`` is the default noise level and
``sampler.size`` the number of replicates ``R``.  A test supplies
``sample_statistics(sampler)`` and ``threshold``; an estimator supplies
``sample_estimates(sampler)``.

Worst-case type II errors are probed at the least-favourable signal ``f0``
of the alternative, not by a search over the alternative set.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .rng import normal_matrix
from .saddlepoint import (
    SQRT2, correlation_r, ermakov_A, finite_correlation, solve_saddlepoint,
)
from .sequence import AlternativeSpec, Signal, separation_radius

CHUNK = 256
THREADS_ENV = "SHARPADAPT_THREADS"
PRIOR_STREAM = 3


def default_workers():
    """Worker count from ``$SHARPADAPT_THREADS``, else every core."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InvalidArgumentError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if value < 1:
            raise InvalidArgumentError(f"{THREADS_ENV} must be positive")
        return value
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MCResult:
    estimate: float
    stderr: float
    reps: int
    seed: int


class Sampler:
    """Observation rows ``y = f + level^{-1/2} xi`` for a block of replicates.

    ``f`` is either a fixed Signal or, when ``prior_sd`` is given, drawn per
    replicate as ``prior_sd * xi'`` from a dedicated stream.  Noise rows are
    cached per stream and extended on demand; the counter generator makes
    a longer draw agree with a shorter one on the common prefix.
    """

    def __init__(self, seed, replicates, n, f=None, prior_sd=None, noise_scale=1.0):
        self.seed = int(seed)
        self.replicates = np.asarray(replicates, dtype=np.int64)
        self.n = n
        self.f = f
        self.prior_sd = None if prior_sd is None else np.asarray(prior_sd, dtype=float)
        self.noise_scale = noise_scale
        self._noise = {}

    @property
    def size(self):
        return self.replicates.size

    def noise(self, J, stream=0):
        cached = self._noise.get(stream)
        if cached is None or cached.shape[1] < J:
            cached = normal_matrix(self.seed, self.replicates, J, stream)
            self._noise[stream] = cached
        return cached[:, :J]

    def signal(self, J):
        """``(R, J)`` signal rows (broadcastable ``(1, J)`` for a fixed f)."""
        if self.prior_sd is not None:
            sd = np.zeros(J)
            m = min(J, self.prior_sd.size)
            sd[:m] = self.prior_sd[:m]
            return sd * self.noise(J, PRIOR_STREAM)
        if self.f is None:
            return np.zeros((1, J))
        return self.f.padded(J)[None, :]

    def __call__(self, J, stream=0, level=None):
        if stream == PRIOR_STREAM:
            raise InvalidArgumentError(f"stream {PRIOR_STREAM} is reserved for prior draws")
        J = int(J)
        level = self.n if level is None else level
        Y = np.broadcast_to(self.signal(J), (self.size, J)).copy()
        if self.noise_scale:
            Y += (self.noise_scale / math.sqrt(level)) * self.noise(J, stream)
        return Y


def _chunks(reps):
    return [np.arange(s, min(s + CHUNK, reps)) for s in range(0, reps, CHUNK)]


def run_replicates(fn, reps, seed, n, f=None, prior_sd=None, noise_scale=1.0, workers=None):
    """Apply ``fn(sampler)`` to every chunk; concatenate outputs in replicate order."""
    if not (isinstance(reps, (int, np.integer)) and reps >= 1):
        raise InvalidArgumentError(f"reps must be a positive integer, got {reps!r}")
    if not n > 0:
        raise InvalidArgumentError("n must be positive")
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise InvalidArgumentError("workers must be positive")

    def task(idx):
        return np.asarray(fn(Sampler(seed, idx, n, f, prior_sd, noise_scale)))

    blocks = _chunks(int(reps))
    if workers == 1 or len(blocks) == 1:
        parts = [task(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, blocks))
    return np.concatenate(parts, axis=0)


def proportion(hits, seed):
    hits = np.asarray(hits, dtype=bool)
    reps = hits.size
    p = float(np.count_nonzero(hits)) / reps
    return MCResult(p, math.sqrt(p * (1.0 - p) / reps), reps, seed)


def sample_mean(values, seed):
    values = np.asarray(values, dtype=float)
    reps = values.size
    sd = float(np.std(values, ddof=1)) if reps > 1 else 0.0
    return MCResult(float(np.mean(values)), sd / math.sqrt(reps), reps, seed)


def _check_length(f, J):
    if J is not None and f is not None and J < len(f):
        raise InvalidArgumentError(f"J={J} is shorter than the signal ({len(f)})")


def estimate_size(test, n, reps, seed, J=None, workers=None):
    """Rejection frequency of ``test`` under ``f = 0``.

    ``J`` is accepted for symmetry with the signal-carrying calls; tests draw
    exactly the coordinates they use, and zero coordinates never matter.
    """
    stats = run_replicates(test.sample_statistics, reps, seed, n, workers=workers)
    return proportion(stats > test.threshold, seed)


def estimate_type2(test, f, n, reps, seed, J=None, workers=None):
    """Acceptance frequency of ``test`` at the signal ``f``."""
    _check_length(f, J)
    stats = run_replicates(test.sample_statistics, reps, seed, n, f=f, workers=workers)
    return proportion(stats <= test.threshold, seed)


def sample_statistics(test, f, n, reps, seed, workers=None, noise_scale=1.0):
    """Raw per-replicate statistics, in replicate order."""
    return run_replicates(test.sample_statistics, reps, seed, n, f=f,
                          noise_scale=noise_scale, workers=workers)


def _squared_errors(estimator, f):
    def fn(sampler):
        E = np.atleast_2d(estimator.sample_estimates(sampler))
        L = max(E.shape[1], len(f))
        diff = -np.broadcast_to(f.padded(L), (E.shape[0], L)).copy()
        diff[:, : E.shape[1]] += E
        return np.sum(diff * diff, axis=-1)
    return fn


def estimate_estimation_risk(estimator, f, n, reps, seed, J=None, workers=None):
    """MC mean of ``||f_hat - f||^2``."""
    _check_length(f, J)
    losses = run_replicates(_squared_errors(estimator, f), reps, seed, n, f=f, workers=workers)
    return sample_mean(losses, seed)


def paired_risk_difference(estimator_a, estimator_b, f, n, reps, seed, workers=None):
    """MC mean of ``loss_a - loss_b`` with both estimators on the same draws."""
    la, lb = _squared_errors(estimator_a, f), _squared_errors(estimator_b, f)
    diffs = run_replicates(lambda s: la(s) - lb(s), reps, seed, n, f=f, workers=workers)
    return sample_mean(diffs, seed)


@dataclass(frozen=True)
class BivariateLabResult:
    """Empirical moments of the two prior-matched statistics.

    ``target_mu1`` and ``target_mu2`` are the limiting mean vectors under the
    priors built for ``M1`` and ``M2``; under pure noise the target is
    ``(0, 0)`` (see :attr:`target_mean`).
    """

    mean1: float
    mean2: float
    corr: float
    target_mu1: tuple
    target_mu2: tuple
    target_corr: float
    stderr1: float = math.nan
    stderr2: float = math.nan
    corr_stderr: float = math.nan
    hypothesis: str = "Q0"
    reps: int = 0
    seed: int = 0
    finite_corr: float = math.nan

    @property
    def target_mean(self):
        return {"Q0": (0.0, 0.0), "Q1": self.target_mu1, "Q2": self.target_mu2}[self.hypothesis]


def prior_statistic_rows(Y, n, sigma_sq):
    """``sum n^2 s (y^2 - 1/n) / ((1 + n s) sqrt(2 n^2 sum s^2))`` per row."""
    s = np.asarray(sigma_sq, dtype=float)
    J = s.size
    Yk = Y[..., :J]
    num = np.sum(n * n * s * (Yk * Yk - 1.0 / n) / (1.0 + n * s), axis=-1)
    return num / (SQRT2 * n * math.sqrt(float(np.sum(s * s))))


def bivariate_lab(M1, M2, beta, c, n, reps, seed, hypothesis="Q0", workers=None):
    """Simulate the two prior-matched statistics under ``Q0``, ``Q1`` or ``Q2``.

    The priors put ``f_j ~ N(0, sigma_j^2(M_i))`` with the least-favourable
    variances at radius ``rho = c n^{-4b/(4b+1)}``.
    """
    if not 0 < M1 < M2:
        raise InvalidArgumentError(f"need 0 < M1 < M2, got M1={M1!r}, M2={M2!r}")
    if hypothesis not in ("Q0", "Q1", "Q2"):
        raise InvalidArgumentError(f"hypothesis must be Q0, Q1 or Q2, got {hypothesis!r}")
    rho = separation_radius(c, n, beta)
    s1 = solve_saddlepoint(AlternativeSpec(beta, M1, rho), n).g0
    s2 = solve_saddlepoint(AlternativeSpec(beta, M2, rho), n).g0
    J = max(s1.size, s2.size)
    prior = {"Q0": None, "Q1": np.sqrt(s1), "Q2": np.sqrt(s2)}[hypothesis]

    def fn(sampler):
        Y = sampler(J)
        return np.stack([prior_statistic_rows(Y, n, s1), prior_statistic_rows(Y, n, s2)], axis=-1)

    T = run_replicates(fn, reps, seed, n, prior_sd=prior, workers=workers)
    r = correlation_r(M1, M2, beta)
    a1 = math.sqrt(ermakov_A(c, beta, M1) / 2.0)
    a2 = math.sqrt(ermakov_A(c, beta, M2) / 2.0)
    corr = float(np.corrcoef(T[:, 0], T[:, 1])[0, 1])
    sd = np.std(T, axis=0, ddof=1) / math.sqrt(reps)
    return BivariateLabResult(
        float(np.mean(T[:, 0])), float(np.mean(T[:, 1])), corr,
        (a1, r * a1), (r * a2, a2), r,
        float(sd[0]), float(sd[1]), (1.0 - corr * corr) / math.sqrt(reps),
        hypothesis, int(reps), int(seed), finite_correlation(s1, s2),
    )
