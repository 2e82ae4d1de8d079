import importlib
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from seqpi import _kernels_py
from seqpi.bounds import g_decay, g_decay_frac, g_uniform
from seqpi.empirical import SampleBuffer
from seqpi.intervals import Regime, lower_pi
from seqpi.pac3 import (
    CZEstimate,
    SimulationConfig,
    estimate_cz,
    pac3_lower_pi,
    simulate_z,
    simulate_z_sample,
    stitched_band,
    stitched_crossing_rate,
    z_draws,
)
from seqpi.streams import replicate_generator

try:
    _kernels = importlib.import_module("seqpi._kernels")
except ImportError:  # extension not built
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")

SMALL = SimulationConfig(p=0.05, delta=0.05, delta_tilde=1e-7, m=10, M=1000,
                         replicates=20_000, seed=11)


def loop_simulator(seed, index, p, m, M, denom):
    """Step-by-step walk: S_t += 1{U_t < p} - p, track the normalised min."""
    u = replicate_generator(seed, index).random(M)
    s, best = 0.0, math.inf
    for t in range(1, M + 1):
        s += (1.0 if u[t - 1] < p else 0.0) - p
        if t >= m:
            best = min(best, s / denom[t - 1])
    return best


def test_config_validation():
    ok = dict(p=0.05, delta=0.05, delta_tilde=1e-7, m=10, M=100, replicates=10_000)
    for bad in [dict(p=0.0), dict(delta=1.0), dict(delta_tilde=0.0), dict(m=100),
                dict(m=0), dict(replicates=0), dict(seed=-1), dict(delta_split=0)]:
        with pytest.raises(ValueError):
            SimulationConfig(**{**ok, **bad})
    with pytest.raises(ValueError, match="increase replicates"):
        SimulationConfig(**{**ok, "replicates": 100})


def test_denominators_use_band_anchored_at_m():
    d = SMALL.denominators()
    assert d.shape == (SMALL.M,)
    assert np.all(d[: SMALL.m - 1] == 1.0)
    t = np.arange(SMALL.m, SMALL.M + 1)
    np.testing.assert_array_equal(d[SMALL.m - 1:], g_decay(t, SMALL.band_params))
    assert SMALL.band_params.M == SMALL.m and SMALL.tail_params.M == SMALL.M


@needs_ext
@pytest.mark.parametrize("p,m", [(0.05, 1), (0.3, 7), (0.5, 64)])
def test_backends_bit_identical(p, m):
    rng = np.random.default_rng(0)
    u = rng.random((37, 300))
    denom = rng.uniform(0.5, 3.0, 300)
    np.testing.assert_array_equal(_kernels.path_min_ratio(u, p, m, denom),
                                  _kernels_py.path_min_ratio(u, p, m, denom))
    a = _kernels.stream_min_ratio(5, 3, 600, p, m, denom)
    b = _kernels_py.stream_min_ratio(5, 3, 600, p, m, denom)
    np.testing.assert_array_equal(a, b)


@needs_ext
def test_backend_argument_checks():
    u = np.zeros((2, 10))
    for mod in (_kernels, _kernels_py):
        with pytest.raises(ValueError):
            mod.path_min_ratio(u, 0.1, 1, np.ones(5))
        with pytest.raises(ValueError):
            mod.path_min_ratio(u, 0.1, 11, np.ones(10))


def test_stream_matches_loop_simulator():
    denom = SMALL.denominators()
    z = z_draws(SMALL.seed, 100, 50, SMALL.p, SMALL.m, denom)
    ref = [loop_simulator(SMALL.seed, r, SMALL.p, SMALL.m, SMALL.M, denom)
           for r in range(100, 150)]
    np.testing.assert_allclose(z, ref, rtol=0, atol=1e-12)


def test_distribution_matches_loop_simulator_ks():
    denom = SMALL.denominators()
    z = z_draws(1, 0, 2000, SMALL.p, SMALL.m, denom)
    ref = [loop_simulator(2, r, SMALL.p, SMALL.m, SMALL.M, denom) for r in range(2000)]
    assert stats.ks_2samp(z, ref).pvalue > 0.01


def test_single_step_walk():
    draws = [simulate_z(replicate_generator(3, r), 0.5, 1, 1, lambda t: 1.0)
             for r in range(2000)]
    assert set(draws) == {-0.5, 0.5}
    assert abs(np.mean(draws)) < 3 * 0.5 / math.sqrt(2000)


def test_walk_is_centred():
    # S_M / M = Z when m = M and the band is 1
    M, p = 200, 0.05
    denom = np.arange(1, M + 1, dtype=float)
    z = z_draws(4, 0, 10_000, p, M, denom)
    sd = math.sqrt(p * (1 - p) / M)
    assert abs(z.mean()) < 3 * sd / math.sqrt(len(z))


def test_simulate_z_band_checks():
    rng = replicate_generator(0, 0)
    with pytest.raises(ValueError):
        simulate_z(rng, 0.1, 1, 10, lambda t: 0.0)
    with pytest.raises(ValueError):
        simulate_z(rng, 0.1, 5, 4, lambda t: 1.0)


def test_simulate_z_agrees_with_sample():
    denom = SMALL.denominators()
    band = denom / np.arange(1, SMALL.M + 1)
    z = simulate_z(replicate_generator(SMALL.seed, 7), SMALL.p, SMALL.m, SMALL.M, band)
    assert z == pytest.approx(simulate_z_sample(SMALL, 7, 1)[0], abs=1e-12)


def test_determinism_across_batching_and_threads():
    a = simulate_z_sample(SMALL, 0, 1500)
    b = simulate_z_sample(SMALL, 0, 1500, batch=97, workers=3)
    np.testing.assert_array_equal(a, b)
    # any slice regenerates independently
    np.testing.assert_array_equal(simulate_z_sample(SMALL, 700, 100), a[700:800])


@pytest.fixture(scope="module")
def small_cz():
    return estimate_cz(SMALL)


def test_cz_estimate_properties(small_cz):
    assert small_cz.c_z > 0
    assert small_cz.epsilon == SMALL.epsilon
    z = simulate_z_sample(SMALL)
    assert -small_cz.c_z == SampleBuffer(z).upper_quantile(SMALL.quantile_level)


def test_estimate_cz_checks_sample_size():
    with pytest.raises(ValueError):
        estimate_cz(SMALL, z=np.zeros(10))


def test_json_roundtrip(small_cz):
    text = small_cz.to_json()
    keys = {"p", "delta", "delta_tilde", "m", "M", "replicates", "seed", "eta", "s",
            "epsilon", "c_z"}
    assert keys <= set(json.loads(text))
    assert CZEstimate.from_json(text) == small_cz


def test_epsilon_shrinks_with_replicates():
    eps = [SimulationConfig(0.05, 0.05, 1e-7, 10, 100, replicates=r).epsilon
           for r in (10_000, 20_000, 40_000, 80_000)]
    assert all(a > b for a, b in zip(eps, eps[1:]))


def test_disjoint_streams_agree():
    base = dict(p=0.05, delta=0.05, delta_tilde=1e-7, m=10, M=1000, replicates=10_000)
    a = estimate_cz(SimulationConfig(**base, seed=21))
    b = estimate_cz(SimulationConfig(**base, seed=22))
    assert abs(a.c_z - b.c_z) < 0.1


def test_stitched_band_shape(small_cz):
    cfg = small_cz.config
    t = np.arange(cfg.m, 50 * cfg.M)
    band = stitched_band(t, small_cz)
    assert np.all(band > 0)
    at_m = stitched_band(cfg.M, small_cz)
    assert at_m == pytest.approx(small_cz.c_z * g_decay_frac(cfg.M, cfg.band_params))
    assert stitched_band(cfg.M + 1, small_cz) == pytest.approx(
        g_decay_frac(cfg.M + 1, cfg.tail_params))
    assert stitched_band(10 ** 9, small_cz) < 1e-3
    with pytest.raises(ValueError):
        stitched_band(cfg.m - 1, small_cz)


def test_stitched_pieces_comparable_at_cutoff(small_cz):
    cfg = small_cz.config
    inner = stitched_band(cfg.M, small_cz)
    tail = g_decay_frac(cfg.M, cfg.tail_params)
    assert 0.5 < inner / tail < 2.0


def test_stitched_below_uniform_band_mid_range(small_cz):
    t = np.arange(50, 1000)
    assert np.all(stitched_band(t, small_cz) < g_uniform(t, small_cz.config.delta))


def test_stitched_crossing_rate_small(small_cz):
    rate = stitched_crossing_rate(small_cz, 1000, 2 * SMALL.M, seed=99)
    d = SMALL.delta
    assert rate <= d + 3 * math.sqrt(d * (1 - d) / 1000)


@pytest.fixture(scope="module")
def interval_cz():
    cfg = SimulationConfig(p=0.05, delta=0.05, delta_tilde=1e-7, m=10, M=500,
                           replicates=20_000, seed=3, delta_split=4)
    return estimate_cz(cfg)


def test_pac3_interval_tighter_than_lower_pi(interval_cz):
    assert 0 < abs(interval_cz.c_z) < 1
    rng = np.random.default_rng(0)
    cfg = interval_cz.config
    for n in (20, 100, 400):
        buf = SampleBuffer(rng.lognormal(size=n))
        iv = pac3_lower_pi(buf, 0.1, interval_cz)
        assert iv.regime is Regime.THREE_PAC and iv.i == n
        # the analytic band the simulated one replaces
        assert iv.issubset(lower_pi(buf, 0.1, g_decay_frac(n, cfg.band_params)))


def test_pac3_requires_matching_level(interval_cz):
    buf = SampleBuffer(np.arange(100.0))
    with pytest.raises(ValueError):
        pac3_lower_pi(buf, 0.2, interval_cz)


def test_pac3_one_sided_when_band_large(interval_cz):
    buf = SampleBuffer(np.arange(20.0))
    iv = pac3_lower_pi(buf, 0.1, interval_cz)
    assert iv.lower == -math.inf


def test_fallback_selected_by_environment():
    code = "from seqpi import kernels; print(kernels.BACKEND)"
    env = {**os.environ, "SEQPI_PURE_PYTHON": "1"}
    res = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "python"
