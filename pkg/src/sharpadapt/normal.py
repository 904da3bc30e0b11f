"""Standard normal CDF and upper quantiles."""

from scipy.special import ndtr, ndtri

from .exceptions import InvalidArgumentError


def normal_cdf(x):
    return ndtr(x)


def upper_quantile(alpha):
    """``z_alpha`` with ``Phi(z_alpha) = 1 - alpha``."""
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha!r}")
    # -ndtri(alpha) keeps full relative accuracy for small alpha
    return float(-ndtri(alpha))
