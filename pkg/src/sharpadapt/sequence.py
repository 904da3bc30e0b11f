"""Signals, Sobolev ellipsoids and observations in the Gaussian sequence model.

Observations follow ``y_j = f_j + n^{-1/2} xi_j``.  Signals are stored
densely up to a finite dimension; coefficients past the stored length are
zero.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleError, InvalidArgumentError
from .rng import standard_normals

MEMBERSHIP_RTOL = 1e-12


def _frozen_array(values, name):
    arr = np.array(values, dtype=np.float64).ravel()
    if arr.size < 1:
        raise InvalidArgumentError(f"{name} must contain at least one entry")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Signal:
    """Finite coefficient vector ``(f_1, ..., f_J)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_array(self.coeffs, "coeffs"))

    def __len__(self):
        return self.coeffs.size

    @property
    def squared(self):
        return self.coeffs ** 2

    def padded(self, J):
        """Coefficients as a length-``J`` array (zero-padded or truncated)."""
        out = np.zeros(J)
        m = min(J, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return out

    def scaled(self, c):
        return Signal(c * self.coeffs)

    @classmethod
    def zeros(cls, J=1):
        return cls(np.zeros(J))

    @classmethod
    def unit(cls, j, J=None, value=1.0):
        """``value * e_j`` with 1-based index ``j``."""
        J = j if J is None else J
        out = np.zeros(J)
        out[j - 1] = value
        return cls(out)

    @classmethod
    def from_squares(cls, g):
        """Signal with nonnegative coefficients whose squares are ``g``."""
        g = np.asarray(g, dtype=np.float64)
        if np.any(g < 0):
            raise InvalidArgumentError("squared coefficients must be nonnegative")
        return cls(np.sqrt(g))


@dataclass(frozen=True)
class AlternativeSpec:
    """Parameters of the alternative ``Sigma(beta, M)`` minus the open ball.

    ``rho`` is the squared radius of the removed ball.
    """

    beta: float
    M: float
    rho: float

    def __post_init__(self):
        for name in ("beta", "M", "rho"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")
        # sqrt(rho) e_1 is the member with the smallest Sobolev norm
        if self.rho > self.M * (1 + MEMBERSHIP_RTOL):
            raise InfeasibleError(
                f"alternative set is empty: rho={self.rho!r} exceeds M={self.M!r}"
            )

    @classmethod
    def at_rate(cls, beta, M, c, n):
        """Spec with ``rho = c * n^{-4 beta / (4 beta + 1)}``."""
        return cls(beta, M, separation_radius(c, n, beta))


def separation_radius(c, n, beta):
    """``c * n^{-4 beta/(4 beta + 1)}``."""
    return c * math.exp(-4.0 * beta / (4.0 * beta + 1.0) * math.log(n))


@dataclass(frozen=True)
class Observations:
    """Observed sequence ``y`` at inverse noise level ``n``."""

    y: np.ndarray
    n: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "y", _frozen_array(self.y, "y"))
        if not (self.n > 0 and math.isfinite(self.n)):
            raise InvalidArgumentError(f"n must be positive, got {self.n!r}")

    def __len__(self):
        return self.y.size


def _index_powers(J, beta):
    return np.arange(1, J + 1, dtype=np.float64) ** (2.0 * beta)


def sobolev_norm(f, beta):
    """``sum_j j^{2 beta} f_j^2`` over the stored coefficients."""
    if not beta > 0:
        raise InvalidArgumentError("beta must be positive")
    coeffs = f.coeffs if isinstance(f, Signal) else np.asarray(f, dtype=float)
    return float(np.sum(_index_powers(coeffs.size, beta) * coeffs ** 2))


def l2_norm_sq(f):
    coeffs = f.coeffs if isinstance(f, Signal) else np.asarray(f, dtype=float)
    return float(np.sum(coeffs ** 2))


def membership(f, spec):
    """Whether ``f`` lies in ``Sigma(beta, M)`` and ``||f||^2 >= rho``.

    Both inequalities carry a relative slack of 1e-12 so that points built
    from solved Lagrange multipliers are not rejected on rounding.
    """
    in_ellipsoid = sobolev_norm(f, spec.beta) <= spec.M * (1 + MEMBERSHIP_RTOL)
    outside_ball = l2_norm_sq(f) >= spec.rho * (1 - MEMBERSHIP_RTOL)
    return bool(in_ellipsoid and outside_ball)


def simulate_observations(f, n, J=None, seed=0, *, replicate=0, stream=0, noise_scale=1.0):
    """Draw ``y_j = f_j + noise_scale * n^{-1/2} xi_j`` for ``j = 1..J``.

    ``xi_j`` depends only on ``(seed, replicate, stream, j)``.  ``J`` defaults
    to ``n`` (rounded up) and must be at least ``len(f)``; ``noise_scale=0``
    returns the signal itself.
    """
    if not n > 0:
        raise InvalidArgumentError("n must be positive")
    if J is None:
        J = max(int(math.ceil(n)), len(f))
    if J < 1:
        raise InvalidArgumentError("J must be positive")
    if J < len(f):
        raise InvalidArgumentError(f"J={J} is shorter than the signal ({len(f)})")
    y = f.padded(J)
    if noise_scale:
        y = y + noise_scale / math.sqrt(n) * standard_normals(seed, replicate, J, stream)
    return Observations(y, n, seed)


def read_signal(source):
    """Parse ``index,coefficient`` rows (1-based, contiguous) into a Signal.

    ``source`` is a path or an open text stream.  A header row is allowed.
    """
    if hasattr(source, "read"):
        rows = list(csv.reader(source))
    else:
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    coeffs = []
    for expected, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise InvalidArgumentError(f"expected 2 columns, got {row!r}")
        index = int(row[0])
        if index != expected:
            raise InvalidArgumentError(f"indices must be 1-based and contiguous; got {index} at row {expected}")
        coeffs.append(float(row[1]))
    return Signal(coeffs)


def write_signal(f, dest=None):
    """Write ``f`` as ``index,coefficient`` rows; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "coefficient"])
    for j, value in enumerate(f.coeffs, start=1):
        writer.writerow([j, repr(float(value))])
    text = buf.getvalue()
    if dest is not None:
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
    return text


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True
