"""Signed-score conformal wrapper with Nadaraya-Watson mean and variance."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .intervals import PredictionInterval

__all__ = [
    "DegenerateInputError",
    "KernelEstimator",
    "response_interval",
    "score",
]

# exp() of anything below this underflows to zero in float64
_LOG_TINY = math.log(np.finfo(np.float64).tiny)


class DegenerateInputError(ValueError):
    """Kernel weights vanish numerically at the query point."""


class KernelEstimator:
    """Gaussian-kernel Nadaraya-Watson estimates of E[Y|X] and V[Y|X].

    The conditional variance comes from the kernel density estimate of the
    joint law; the kernel's second moment contributes an extra ``h**2``.
    """

    def __init__(self, xs, ys, h: float, chunk: int = 2048):
        xs = np.asarray(xs, dtype=np.float64).ravel()
        ys = np.asarray(ys, dtype=np.float64).ravel()
        if xs.shape != ys.shape or xs.size == 0:
            raise ValueError("xs and ys must be non-empty and of equal length")
        if not h > 0:
            raise ValueError("bandwidth h must be positive")
        self.xs = xs
        self.ys = ys
        self.h = float(h)
        self._chunk = chunk

    def _weights(self, x: np.ndarray) -> np.ndarray:
        # max-shifted exponents: largest weight per row is exactly 1
        expo = -0.5 * ((x[:, None] - self.xs[None, :]) / self.h) ** 2
        top = expo.max(axis=1)
        log_norm = -math.log(self.h * math.sqrt(2.0 * math.pi))
        if np.any(top + log_norm + math.log(self.xs.size) < _LOG_TINY):
            bad = x[np.argmin(top)]
            raise DegenerateInputError(
                f"kernel weights underflow at x={bad!r} (h={self.h})"
            )
        return np.exp(expo - top[:, None])

    def _moments(self, x):
        x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        mean = np.empty_like(x_arr)
        var = np.empty_like(x_arr)
        for start in range(0, x_arr.size, self._chunk):
            sl = slice(start, start + self._chunk)
            w = self._weights(x_arr[sl])
            tot = w.sum(axis=1)
            mu = (w @ self.ys) / tot
            resid = self.ys[None, :] - mu[:, None]
            mean[sl] = mu
            var[sl] = (w * resid * resid).sum(axis=1) / tot
        return np.ndim(x) == 0, mean, var

    def mean(self, x):
        scalar, mean, _ = self._moments(x)
        return float(mean[0]) if scalar else mean

    def variance(self, x):
        """``sum K (h^2 + Y^2) / sum K - mean^2``, evaluated in centred form."""
        scalar, _, var = self._moments(x)
        var = var + self.h ** 2
        return float(var[0]) if scalar else var

    def std(self, x):
        return np.sqrt(self.variance(x))


def nw_mean(est: KernelEstimator, x):
    return est.mean(x)


def nw_variance(est: KernelEstimator, x):
    return est.variance(x)


def _positive_sigma(s):
    s_arr = np.asarray(s, dtype=np.float64)
    if np.any(~(s_arr > 0)):
        raise ValueError("sigma(x) must be positive")
    return s


def score(f: Callable, sigma: Callable, x, y):
    """Signed standardised residual ``(y - f(x)) / sigma(x)``."""
    s = _positive_sigma(sigma(x))
    return (y - f(x)) / s


def response_interval(f: Callable, sigma: Callable, x: float,
                      score_iv: PredictionInterval) -> PredictionInterval:
    """Map a score interval ``[L, U]`` to ``[f(x) + sigma(x) L, f(x) + sigma(x) U]``."""
    s = float(_positive_sigma(sigma(x)))
    if score_iv.empty:
        return score_iv
    fx = float(f(x))
    return PredictionInterval(
        fx + s * score_iv.lower,
        fx + s * score_iv.upper,
        score_iv.alpha,
        score_iv.i,
        score_iv.regime,
        score_iv.band_used,
    )
