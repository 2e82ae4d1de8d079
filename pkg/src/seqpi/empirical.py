"""Exact empirical distribution of a growing sample.

Quantiles follow the sup-definitions

    Q(p)  = sup{x : F(x) <= p}      (upper quantile)
    Q-(p) = sup{x : F(x) <  p}      (lower quantile)

evaluated on the empirical CDF. Arguments outside the range where the
defining set is a proper half-line give ``-inf`` / ``+inf`` rather than an
error, so bound-shifted levels such as ``alpha/2 - g`` can be passed as-is.
Extended reals are plain floats with ``math.inf``.
"""

from __future__ import annotations

import bisect
import math
from typing import Iterable

__all__ = ["SampleBuffer", "EmptySampleError", "rank_floor", "rank_ceil"]

# n*p within this relative distance of an integer is treated as that integer,
# so that e.g. 100 * (0.9 + 0.05) selects rank 95 and not 96.
_RANK_RTOL = 1e-9


class EmptySampleError(ValueError):
    """Raised when a query needs at least one observation."""


def _snap(x: float) -> float:
    r = round(x)
    if abs(x - r) <= _RANK_RTOL * max(1.0, abs(x)):
        return float(r)
    return x


def rank_floor(n: int, p: float) -> int:
    return math.floor(_snap(n * p))


def rank_ceil(n: int, p: float) -> int:
    return math.ceil(_snap(n * p))


class SampleBuffer:
    """Sorted multiset of finite reals.

    >>> buf = SampleBuffer([1, 2, 3, 4])
    >>> buf.upper_quantile(0.5), buf.lower_quantile(0.5)
    (3.0, 2.0)
    """

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[float] = ()):
        self._values: list[float] = []
        self.extend(values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"SampleBuffer(n={len(self._values)})"

    @property
    def n(self) -> int:
        return len(self._values)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(self._values)

    def insert(self, x: float) -> "SampleBuffer":
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"sample values must be finite, got {x!r}")
        bisect.insort_right(self._values, x)
        return self

    def extend(self, xs: Iterable[float]) -> "SampleBuffer":
        xs = [float(x) for x in xs]
        if not all(math.isfinite(x) for x in xs):
            raise ValueError("sample values must be finite")
        if len(xs) > len(self._values):
            self._values = sorted(self._values + xs)
        else:
            for x in xs:
                bisect.insort_right(self._values, x)
        return self

    def _check(self) -> None:
        if not self._values:
            raise EmptySampleError("empirical distribution of an empty sample")

    def count_le(self, x: float) -> int:
        """Number of stored values ``<= x``."""
        return bisect.bisect_right(self._values, x)

    def count_lt(self, x: float) -> int:
        """Number of stored values ``< x``."""
        return bisect.bisect_left(self._values, x)

    def ecdf(self, x: float) -> float:
        self._check()
        return self.count_le(x) / len(self._values)

    def upper_quantile(self, p: float) -> float:
        """``sup{x : F(x) <= p}``; the ``floor(n p) + 1``-th order statistic."""
        self._check()
        n = len(self._values)
        x = _snap(n * p)
        if x < 0:
            return -math.inf
        k = math.floor(x)
        if k >= n:
            return math.inf
        return self._values[k]

    def lower_quantile(self, p: float) -> float:
        """``sup{x : F(x) < p}``; the ``ceil(n p)``-th order statistic."""
        self._check()
        n = len(self._values)
        x = _snap(n * p)
        if x <= 0:
            return -math.inf
        if x > n:
            return math.inf
        return self._values[math.ceil(x) - 1]
