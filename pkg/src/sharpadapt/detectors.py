"""Quadratic test statistics and the nonadaptive minimax test."""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateError, InvalidArgumentError
from .normal import normal_cdf, upper_quantile
from .saddlepoint import SQRT2, solve_saddlepoint
from .sequence import Signal

NORM_TOL = 1e-12


def _as_weights(d):
    d = np.asarray(d, dtype=float).ravel()
    if abs(float(np.sum(d * d)) - 1.0) > NORM_TOL:
        raise InvalidArgumentError(f"coefficients must have unit norm, got ||d||^2={np.sum(d * d)!r}")
    return d


def standardized_sum(y, d, n):
    """``sum_j d_j (n y_j^2 - 1) / sqrt(2)`` along the last axis of ``y``.

    ``y`` may be a single vector or a ``(replicates, J)`` array with
    ``J >= len(d)``.  No validation; the public wrappers check inputs.
    """
    k = d.size
    yk = np.asarray(y)[..., :k]
    return np.sum(d * (n * yk * yk - 1.0), axis=-1) / SQRT2


def quadratic_statistic(y, d):
    """``T = (n sum d_j y_j^2 - sum d_j) / sqrt(2)`` for unit-norm ``d``.

    Under ``f = 0`` every unit-norm ``d`` gives ``E T = 0`` and ``Var T = 1``.
    """
    d = _as_weights(d)
    if d.size > len(y):
        raise InvalidArgumentError(f"len(d)={d.size} exceeds len(y)={len(y)}")
    return float(standardized_sum(y.y, d, y.n))


def in_class_D(d, n, rho, delta=None):
    """Unit norm and ``max_j d_j^2 <= delta / (n rho)``; ``delta = 1/log n`` by default."""
    d = np.asarray(d, dtype=float)
    if delta is None:
        delta = 1.0 / math.log(n)
    unit = abs(float(np.sum(d * d)) - 1.0) <= NORM_TOL
    small = float(np.max(d * d)) <= delta / (n * rho)
    return bool(unit and small and np.all(d >= 0))


def noncentrality_L(d, f, n):
    """``L(d, f^2) = (n / sqrt(2)) sum_j d_j f_j^2``; equals ``E_f T`` exactly."""
    d = np.asarray(d, dtype=float)
    g = f.padded(d.size) ** 2 if isinstance(f, Signal) else np.asarray(f, dtype=float)[: d.size] ** 2
    return n * float(np.sum(d * g)) / SQRT2


@dataclass(frozen=True)
class QuadraticTest:
    """Indicator test ``1{T > threshold}`` with coefficients ``d``.

    ``L0`` records the saddlepoint value when the test comes from
    :func:`ermakov_test`, so the predicted type II error at ``f0`` is
    available without simulation.
    """

    d: np.ndarray
    threshold: float
    alpha: float
    n: float
    L0: float = math.nan

    def __post_init__(self):
        d = _as_weights(self.d)
        if np.any(d < 0):
            raise InvalidArgumentError("coefficients must be nonnegative")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @classmethod
    def with_level(cls, d, alpha, n, **kw):
        return cls(d, upper_quantile(alpha), alpha, n, **kw)

    def statistic(self, y):
        return quadratic_statistic(y, self.d)

    def __call__(self, y):
        """``(reject, statistic)`` for one observation vector."""
        t = self.statistic(y)
        return t > self.threshold, t

    @property
    def predicted_type2(self):
        """``Phi(threshold - L0)``."""
        return float(normal_cdf(self.threshold - self.L0))

    def sample_statistics(self, sampler):
        """Statistics for every replicate a harness sampler represents."""
        return standardized_sum(sampler(self.d.size), self.d, sampler.n)


def ermakov_test(spec, n, alpha):
    """Quadratic test with the saddlepoint coefficients ``d0`` and threshold ``z_alpha``."""
    sp = solve_saddlepoint(spec, n)
    return QuadraticTest.with_level(sp.d0, alpha, n, L0=sp.L0)


def neyman_pearson_check(sigma_sq, n):
    """Coefficients of the Bayes test against the prior ``f_j ~ N(0, sigma_j^2)``.

    The likelihood ratio is increasing in ``sum_j dt_j y_j^2`` with
    ``dt_j = n s_j / (n s_j + 1)``; ``d`` is ``dt`` normalised to unit norm.
    Returns ``(d, drift)`` where ``drift`` is the largest relative deviation
    ``|d_j / d0_j - 1|`` from ``d0 = sigma^2 / ||sigma^2||`` on its support.
    """
    s = np.asarray(sigma_sq.coeffs if isinstance(sigma_sq, Signal) else sigma_sq, dtype=float)
    if np.any(s < 0):
        raise InvalidArgumentError("variances must be nonnegative")
    dt = n * s / (n * s + 1.0)
    norm = float(np.sqrt(np.sum(dt * dt)))
    if norm == 0.0:
        raise DegenerateError("all prior variances are zero; the Bayes test is undefined")
    d = dt / norm
    d0 = s / float(np.sqrt(np.sum(s * s)))
    support = d0 > 0
    drift = float(np.max(np.abs(d[support] / d0[support] - 1.0)))
    return d, drift
