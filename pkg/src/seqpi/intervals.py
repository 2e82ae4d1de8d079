"""Time-uniform prediction intervals from empirical quantiles.

Given a band ``g`` that bounds the empirical CDF deviation uniformly over
sample sizes and levels, the *lower* interval

    [Q(alpha/2 - g), Q-(1 - alpha/2 + g)]

has coverage ``>= 1 - alpha`` and the *upper* interval

    [Q-(alpha/2 + g), Q(1 - alpha/2 - g)]

has coverage ``<= 1 - alpha`` for every sample size, on one event of
probability ``>= 1 - delta``. ``alpha_star`` turns the pair into an
observable upper bound on the coverage of the lower interval.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .empirical import EmptySampleError, SampleBuffer

__all__ = [
    "AlphaStar",
    "PredictionInterval",
    "Regime",
    "alpha_star",
    "lower_pi",
    "true_coverage",
    "upper_pi",
]


class Regime(str, enum.Enum):
    TWO_PAC = "two-pac-analytic"
    THREE_PAC = "three-pac-simulated"


@dataclass(frozen=True)
class PredictionInterval:
    """Closed interval over the extended reals.

    An empty interval has ``empty=True`` and NaN endpoints.
    """

    lower: float
    upper: float
    alpha: float
    i: int
    regime: Regime
    band_used: float
    empty: bool = False

    def __post_init__(self):
        if not self.empty and not self.lower <= self.upper:
            raise ValueError(f"lower {self.lower} > upper {self.upper}")

    @classmethod
    def empty_interval(cls, alpha, i, regime, band_used) -> "PredictionInterval":
        return cls(math.nan, math.nan, alpha, i, regime, band_used, empty=True)

    def __contains__(self, y: float) -> bool:
        return not self.empty and self.lower <= y <= self.upper

    def issubset(self, other: "PredictionInterval") -> bool:
        if self.empty:
            return True
        if other.empty:
            return False
        return other.lower <= self.lower and self.upper <= other.upper

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.upper - self.lower


@dataclass(frozen=True)
class AlphaStar:
    alpha_l: float
    alpha_u: float

    @property
    def alpha_star(self) -> float:
        return min(self.alpha_l, self.alpha_u)


def _check(buf: SampleBuffer, alpha: float, g: float) -> None:
    if len(buf) == 0:
        raise EmptySampleError("prediction interval from an empty sample")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not g > 0.0:
        raise ValueError(f"band g must be positive, got {g!r}")


def lower_pi(buf: SampleBuffer, alpha: float, g: float,
             regime: Regime = Regime.TWO_PAC) -> PredictionInterval:
    """Conservative interval: coverage ``>= 1 - alpha`` on the good event."""
    _check(buf, alpha, g)
    lo = buf.upper_quantile(alpha / 2 - g)
    hi = buf.lower_quantile(1 - alpha / 2 + g)
    return PredictionInterval(lo, hi, alpha, len(buf), Regime(regime), g)


def upper_pi(buf: SampleBuffer, alpha: float, g: float,
             regime: Regime = Regime.TWO_PAC) -> PredictionInterval:
    """Anti-conservative interval: coverage ``<= 1 - alpha`` on the good event."""
    _check(buf, alpha, g)
    a, b = alpha / 2 + g, 1 - alpha / 2 - g
    if a > b:
        return PredictionInterval.empty_interval(alpha, len(buf), Regime(regime), g)
    lo = buf.lower_quantile(a)
    hi = buf.upper_quantile(b)
    if lo > hi:
        return PredictionInterval.empty_interval(alpha, len(buf), Regime(regime), g)
    return PredictionInterval(lo, hi, alpha, len(buf), Regime(regime), g)


def _sup_below(bound: Fraction) -> float:
    # largest level in [0, 1] not above bound (0 if none), rounded once
    if bound < 0:
        return 0.0
    return float(min(Fraction(1), bound))


def alpha_star(buf: SampleBuffer, alpha: float, g: float,
               literal: bool = False) -> AlphaStar:
    """Observable coverage bound: ``1 - alpha_star >= P(Z in lower_pi)``.

    Both defining sets are down-closed in the free level, and the step
    quantiles jump only at ranks ``k/n``, so each supremum sits at a rank
    breakpoint and has a closed form:

    * ``alpha_l``: ``Q-(a/2 + g) < T`` with ``T = Q(alpha/2 - g)`` holds iff
      ``a/2 + g <= #{x < T}/n``.
    * ``alpha_u``: ``Q(1 - a/2 - g) > T'`` with ``T' = Q-(1 - alpha/2 + g)``
      holds iff ``1 - a/2 - g >= #{x <= T'}/n``.

    ``literal=True`` uses the upper quantile ``Q(1 - alpha/2 + g)`` for
    ``T'`` instead.
    """
    _check(buf, alpha, g)
    n = len(buf)
    # breakpoints in exact arithmetic so the result is correctly rounded
    g_q = Fraction(g)

    t_low = buf.upper_quantile(alpha / 2 - g)
    if t_low == -math.inf:
        a_l = 0.0
    else:
        c = n if t_low == math.inf else buf.count_lt(t_low)
        a_l = _sup_below(2 * (Fraction(c, n) - g_q))

    level = 1 - alpha / 2 + g
    t_up = buf.upper_quantile(level) if literal else buf.lower_quantile(level)
    if t_up == math.inf:
        a_u = 0.0
    else:
        d = buf.count_le(t_up)
        a_u = _sup_below(2 * (1 - g_q - Fraction(d, n)))

    return AlphaStar(a_l, a_u)


def true_coverage(interval: PredictionInterval,
                  cdf: Callable[[float], float]) -> float:
    """``P(Z in interval)`` for a continuous law with distribution ``cdf``."""
    if interval.empty:
        return 0.0
    hi = 1.0 if interval.upper == math.inf else float(cdf(interval.upper))
    lo = 0.0 if interval.lower == -math.inf else float(cdf(interval.lower))
    return max(0.0, hi - lo)
