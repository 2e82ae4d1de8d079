"""Prediction intervals for independent sequences sandwiched by an IID one.

A sequence ``X`` is IID bounded when an IID coupling ``Y`` exists with
``c1 Y_i + delta1 <= X_i <= c2 Y_i + delta2`` pathwise. Empirical CDFs and
quantiles of ``X`` then bracket those of ``Y`` deterministically, which
lets the IID intervals be transported to ``X`` at the cost of an affine
enlargement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .empirical import EmptySampleError, SampleBuffer, _snap
from .intervals import PredictionInterval, Regime, lower_pi

__all__ = [
    "BoundingConstants",
    "QuantileBracket",
    "iid_bounded_interval",
    "quantile_sandwich",
    "sandwich_cdf_check",
]


@dataclass(frozen=True)
class BoundingConstants:
    c1: float
    delta1: float
    c2: float
    delta2: float

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")

    @classmethod
    def identity(cls) -> "BoundingConstants":
        return cls(1.0, 0.0, 1.0, 0.0)

    @classmethod
    def additive(cls, eps: float) -> "BoundingConstants":
        """Constants for ``|X_i - Y_i| <= eps``."""
        return cls(1.0, -eps, 1.0, eps)

    def admits(self, x, y) -> bool:
        """Whether every coupled pair satisfies the sandwich."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return bool(np.all(self.c1 * y + self.delta1 <= x)
                    and np.all(x <= self.c2 * y + self.delta2))


def _ecdf(sorted_vals: np.ndarray, x) -> np.ndarray:
    return np.searchsorted(sorted_vals, x, side="right") / len(sorted_vals)


def sandwich_cdf_check(xs, ys, k: BoundingConstants, x_grid) -> bool:
    """Check ``F_X(c1 x + d1) <= F_Y(x) <= F_X(c2 x + d2)`` on ``x_grid``."""
    xs = np.sort(np.asarray(xs, dtype=float))
    ys = np.sort(np.asarray(ys, dtype=float))
    if xs.shape != ys.shape:
        raise ValueError("xs and ys must have the same length")
    if xs.size == 0:
        raise EmptySampleError("empty coupled sample")
    grid = np.asarray(x_grid, dtype=float)
    f_y = _ecdf(ys, grid)
    lo = _ecdf(xs, k.c1 * grid + k.delta1)
    hi = _ecdf(xs, k.c2 * grid + k.delta2)
    return bool(np.all(lo <= f_y) and np.all(f_y <= hi))


def _affine_inverse(q: float, d: float, c: float, up: bool) -> float:
    # (q - d) / c evaluated exactly, then rounded outward to a float
    if math.isinf(q):
        return q
    exact = (Fraction(q) - Fraction(d)) / Fraction(c)
    v = float(exact)
    if up and Fraction(v) < exact:
        v = math.nextafter(v, math.inf)
    elif not up and Fraction(v) > exact:
        v = math.nextafter(v, -math.inf)
    return v


@dataclass(frozen=True)
class QuantileBracket:
    """Bounds on the coupling's quantiles computed from the X sample alone."""

    upper: tuple[float, float]
    lower: tuple[float, float]


def quantile_sandwich(xs: SampleBuffer, k: BoundingConstants,
                      alpha: float) -> QuantileBracket:
    """Bracket ``Q_Y(alpha)`` and ``Q-_Y(alpha)`` using ``X`` quantiles.

    Requires ``n * alpha`` to be an integer. Endpoints are rounded outward,
    so the bracket is never narrower than its exact value.
    """
    n = len(xs)
    if n == 0:
        raise EmptySampleError("quantile bracket from an empty sample")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if _snap(n * alpha) != round(n * alpha):
        raise ValueError(f"n * alpha = {n * alpha!r} is not an integer")
    qu = xs.upper_quantile(alpha)
    ql = xs.lower_quantile(alpha)
    def bracket(q):
        return (_affine_inverse(q, k.delta2, k.c2, up=False),
                _affine_inverse(q, k.delta1, k.c1, up=True))

    return QuantileBracket(upper=bracket(qu), lower=bracket(ql))


def iid_bounded_interval(xs: SampleBuffer, alpha: float, g: float,
                         k: BoundingConstants):
    """Return ``(C, C_tilde)``: intervals for the coupling and for ``X``.

    ``C = [(Q(alpha/2 - g) - d2)/c2, (Q-(1 - alpha/2 + g) - d1)/c1]`` uses
    only the observed X quantiles; ``C_tilde = [c1 l + d1, c2 r + d2]``.
    """
    base = lower_pi(xs, alpha, g)
    l = (base.lower - k.delta2) / k.c2
    r = (base.upper - k.delta1) / k.c1
    c = PredictionInterval(l, r, alpha, base.i, Regime.TWO_PAC, g)
    c_tilde = PredictionInterval(
        k.c1 * l + k.delta1, k.c2 * r + k.delta2, alpha, base.i, Regime.TWO_PAC, g
    )
    return c, c_tilde
