import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from seqpi.empirical import EmptySampleError, SampleBuffer

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
samples = st.lists(finite, min_size=1, max_size=40)
levels = st.floats(-0.5, 1.5, allow_nan=False)


def test_insert_keeps_order_and_duplicates():
    buf = SampleBuffer()
    buf.insert(1.0)
    assert buf.values == (1.0,) and buf.n == 1
    buf.insert(0.5)
    assert buf.values == (0.5, 1.0)
    buf.insert(0.5)
    assert buf.values == (0.5, 0.5, 1.0)
    assert len(buf) == 3


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_insert_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        SampleBuffer().insert(bad)
    with pytest.raises(ValueError):
        SampleBuffer([1.0, bad])


def test_ecdf_examples():
    buf = SampleBuffer([1, 2, 3])
    assert buf.ecdf(2) == pytest.approx(2 / 3)
    assert buf.ecdf(0) == 0
    assert buf.ecdf(3) == 1


def test_empty_buffer_queries_raise():
    buf = SampleBuffer()
    for call in (lambda: buf.ecdf(0.0), lambda: buf.upper_quantile(0.5),
                 lambda: buf.lower_quantile(0.5)):
        with pytest.raises(EmptySampleError):
            call()


def test_quantile_examples():
    buf = SampleBuffer([1, 2, 3, 4])
    assert buf.upper_quantile(0.5) == 3
    assert buf.upper_quantile(-0.1) == -math.inf
    assert buf.upper_quantile(1.0) == math.inf
    assert buf.lower_quantile(0.5) == 2
    assert buf.lower_quantile(0.0) == -math.inf
    assert buf.lower_quantile(1.0) == 4
    assert buf.lower_quantile(1.2) == math.inf


def test_decimal_levels_snap_to_intended_rank():
    buf = SampleBuffer(range(1, 101))
    # 0.9 + 0.05 is 0.9500000000000001 in binary floating point
    assert buf.lower_quantile(0.9 + 0.05) == 95
    assert buf.lower_quantile(0.1 + 0.05) == 15


def test_extend_matches_repeated_insert():
    xs = [3.0, -1.0, 2.0, 2.0, 7.5, 0.0]
    a = SampleBuffer(xs[:2]).extend(xs[2:])
    b = SampleBuffer()
    for x in xs:
        b.insert(x)
    assert a.values == b.values == tuple(sorted(xs))


@given(samples)
def test_insertion_invariants(xs):
    buf = SampleBuffer()
    for k, x in enumerate(xs, 1):
        before = buf.values
        buf.insert(x)
        assert buf.n == k
        assert list(buf.values) == sorted(buf.values)
        remaining = list(buf.values)
        for v in before:
            remaining.remove(v)
        assert remaining == [x]


@given(samples, levels, levels)
def test_quantile_monotone_and_ordered(xs, p, q):
    buf = SampleBuffer(xs)
    p, q = min(p, q), max(p, q)
    assert buf.lower_quantile(p) <= buf.upper_quantile(p)
    assert buf.upper_quantile(p) <= buf.upper_quantile(q)
    assert buf.lower_quantile(p) <= buf.lower_quantile(q)


@given(samples, st.floats(0.0, 0.999999, allow_nan=False))
def test_ecdf_at_upper_quantile_exceeds_level(xs, p):
    buf = SampleBuffer(xs)
    q = buf.upper_quantile(p)
    if math.isfinite(q):
        assert buf.ecdf(q) > p or math.isclose(buf.ecdf(q), p)


def _alphabet_samples(max_n=8, alphabet=(0, 1, 2, 3)):
    for n in range(1, max_n + 1):
        yield from itertools.combinations_with_replacement(alphabet, n)


def test_quantiles_match_brute_force_small_samples():
    mismatches = 0
    for sample in _alphabet_samples(6):
        n = len(sample)
        buf = SampleBuffer(sample)
        brute = oracles.BruteSample(sample)
        for k in range(-2, 4 * n + 3):
            p = Fraction(k, 4 * n)
            pf = float(p)
            mismatches += buf.upper_quantile(pf) != brute.upper_quantile(p)
            mismatches += buf.lower_quantile(pf) != brute.lower_quantile(p)
    assert mismatches == 0
