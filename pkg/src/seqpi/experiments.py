"""Experiment engines behind the CLI subcommands.

Each function returns plain rows (lists) plus a summary dict, so the same
code drives the CSV writers and the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .bounds import g_decay_frac, g_uniform
from .conformal import KernelEstimator, response_interval, score
from .empirical import SampleBuffer
from .iid_bounded import BoundingConstants, iid_bounded_interval
from .intervals import alpha_star, lower_pi, true_coverage
from .pac3 import CZEstimate, SimulationConfig, estimate_cz, pac3_lower_pi, stitched_band
from .streams import replicate_generator, substream_generator, substream_seed

DISTRIBUTIONS = ("normal", "lognormal", "uniform")

_LN_MEAN = math.exp(0.5)
_LN_SD = math.sqrt((math.e - 1.0) * math.e)


def noise_law(name: str):
    """Frozen scipy law; ``lognormal`` is standardised to mean 0, variance 1."""
    if name == "normal":
        return stats.norm()
    if name == "lognormal":
        return stats.lognorm(s=1.0, loc=-_LN_MEAN / _LN_SD, scale=1.0 / _LN_SD)
    if name == "uniform":
        return stats.uniform()
    raise ValueError(f"unknown distribution {name!r}; choose from {DISTRIBUTIONS}")


def sample_noise(name: str, rng: np.random.Generator, size) -> np.ndarray:
    if name == "normal":
        return rng.standard_normal(size)
    if name == "lognormal":
        return (np.exp(rng.standard_normal(size)) - _LN_MEAN) / _LN_SD
    if name == "uniform":
        return rng.random(size)
    raise ValueError(f"unknown distribution {name!r}; choose from {DISTRIBUTIONS}")


def checkpoints(start: int, stop: int, ratio: float = 1.2) -> list[int]:
    """Geometric schedule ``ceil(start * ratio**k)`` up to ``stop`` (inclusive)."""
    if start < 1 or stop < start:
        raise ValueError("need 1 <= start <= stop")
    out = []
    k = 0
    while True:
        i = math.ceil(start * ratio ** k)
        if i > stop:
            break
        if not out or i > out[-1]:
            out.append(i)
        k += 1
    if out[-1] != stop:
        out.append(stop)
    return out


def calibrate(alpha: float, delta: float, delta_tilde: float, m: int, M: int,
              replicates: int, seed: int, delta_split: int = 4) -> CZEstimate:
    """c_Z for a two-sided interval at level ``alpha`` (``p = alpha/2``)."""
    cfg = SimulationConfig(
        p=alpha / 2, delta=delta, delta_tilde=delta_tilde, m=m, M=M,
        replicates=replicates, seed=substream_seed(seed, "calibration"),
        delta_split=delta_split,
    )
    return estimate_cz(cfg)


# -- bound table ------------------------------------------------------------

def bound_table(cz: CZEstimate, t_max: int, n_points: int = 200,
                trajectories: int = 0, seed: int = 0):
    """Rows ``t, g_uniform, g_decay_frac, stitched_band[, traj_k...]``.

    ``g_decay_frac`` is the analytic single-quantile band: anchored at ``m``
    on ``[m, M]`` and at ``M`` beyond, so ``stitched_band`` differs from it
    only by the factor ``c_Z`` inside the simulated window.
    """
    cfg = cz.config
    grid = np.unique(np.concatenate([
        np.geomspace(cfg.m, t_max, n_points).round().astype(np.int64),
        [cfg.m, cfg.M, t_max],
    ]))
    grid = grid[(grid >= cfg.m) & (grid <= t_max)]
    gu = g_uniform(grid, cfg.delta)
    inner = np.minimum(grid, cfg.M)
    outer = np.maximum(grid, cfg.M)
    gd = np.where(grid <= cfg.M, g_decay_frac(inner, cfg.band_params),
                  g_decay_frac(outer, cfg.tail_params))
    sb = stitched_band(grid, cz)
    cols = [grid, gu, gd, sb]
    header = ["t", "g_uniform", "g_decay_frac", "stitched_band"]
    if trajectories:
        rng_seed = substream_seed(seed, "trajectories")
        for k in range(trajectories):
            u = replicate_generator(rng_seed, k).random(int(t_max))
            s_t = np.cumsum(u < cfg.p) - cfg.p * np.arange(1, t_max + 1)
            cols.append(s_t[grid - 1] / grid)
            header.append(f"traj_{k}")
    rows = [[int(c[0])] + [float(v) for v in c[1:]] for c in zip(*cols)]
    return header, rows


# -- coverage ---------------------------------------------------------------

@dataclass
class CoverageSummary:
    streams: int
    lower_failures: int = 0
    sandwich_failures: int = 0
    final_coverage: list = field(default_factory=list)
    first_coverage: list = field(default_factory=list)

    def rate(self, failures: int) -> float:
        return failures / self.streams

    @property
    def lower_failure_rate(self) -> float:
        return self.rate(self.lower_failures)

    @property
    def sandwich_failure_rate(self) -> float:
        return self.rate(self.sandwich_failures)


def coverage_run(dist: str, alpha: float, delta: float, streams: int, n_max: int,
                 seed: int, regime: str = "two-pac", cz: CZEstimate | None = None,
                 start: int = 1, ratio: float = 1.2):
    """Track true coverage of the lower interval along independent streams.

    ``regime="two-pac"`` uses ``g_uniform`` and also logs ``1 - alpha*``;
    ``"three-pac"`` uses the calibrated band in ``cz``. Returns
    ``(header, rows, summary)``.
    """
    law = noise_law(dist)
    if regime == "three-pac":
        if cz is None:
            raise ValueError("three-pac regime needs a calibration")
        start = max(start, cz.config.m)
    elif regime != "two-pac":
        raise ValueError(f"unknown regime {regime!r}")
    sched = checkpoints(start, n_max, ratio)
    data_seed = substream_seed(seed, "data")
    header = ["stream", "i", "lower", "upper", "band", "coverage",
              "one_minus_alpha_star", "regime"]
    rows = []
    summary = CoverageSummary(streams)
    for s in range(streams):
        xs = sample_noise(dist, replicate_generator(data_seed, s), n_max)
        buf = SampleBuffer()
        done = 0
        lower_ok = sandwich_ok = True
        covs = []
        for i in sched:
            buf.extend(xs[done:i])
            done = i
            if regime == "two-pac":
                g = g_uniform(i, delta)
                iv = lower_pi(buf, alpha, g)
                bound = 1.0 - alpha_star(buf, alpha, g).alpha_star
            else:
                iv = pac3_lower_pi(buf, alpha, cz, i)
                bound = math.nan
            cov = true_coverage(iv, law.cdf)
            covs.append(cov)
            lower_ok &= cov >= 1.0 - alpha
            if regime == "two-pac":
                sandwich_ok &= bound >= cov >= 1.0 - alpha
            rows.append([s, i, iv.lower, iv.upper, iv.band_used, cov, bound,
                         iv.regime.value])
        summary.lower_failures += not lower_ok
        summary.sandwich_failures += not sandwich_ok
        summary.first_coverage.append(covs[0])
        summary.final_coverage.append(covs[-1])
    return header, rows, summary


# -- regression demo --------------------------------------------------------

def r_true(x):
    return np.sin(3.0 * x)


def sigma_true(x):
    return np.abs(np.sin(10.0 * x))


def regression_demo(dist: str, alpha: float, delta: float, n_train: int,
                    sample_counts: list[int], cz: CZEstimate, seed: int,
                    bandwidth: float = 1 / 500, grid_points: int = 101):
    """Conformalised prediction bands for ``Y = sin(3x) + |sin(10x)| eps``.

    Mean and standard deviation are Nadaraya-Watson fits on a training
    split; score intervals come from a separate calibration stream.
    """
    law = noise_law(dist)
    rng_train = substream_generator(seed, "train")
    x_tr = rng_train.random(n_train)
    y_tr = r_true(x_tr) + sigma_true(x_tr) * sample_noise(dist, rng_train, n_train)
    est = KernelEstimator(x_tr, y_tr, bandwidth)
    f_hat, s_hat = est.mean, est.std

    n_cal = max(sample_counts)
    rng_cal = substream_generator(seed, "calibration-data")
    x_cal = rng_cal.random(n_cal)
    y_cal = r_true(x_cal) + sigma_true(x_cal) * sample_noise(dist, rng_cal, n_cal)
    scores = score(f_hat, s_hat, x_cal, y_cal)

    grid = np.linspace(0.0, 1.0, grid_points)
    f_grid = f_hat(grid)
    s_grid = s_hat(grid)
    q_lo, q_hi = law.ppf(alpha / 2), law.ppf(1 - alpha / 2)
    header = ["i", "x", "f_hat", "sigma_hat", "lo_2pac", "hi_2pac", "lo_3pac",
              "hi_3pac", "score_lo_2pac", "score_hi_2pac", "score_lo_3pac",
              "score_hi_3pac", "r_true", "true_lo", "true_hi"]
    rows = []
    buf = SampleBuffer()
    done = 0
    for i in sorted(sample_counts):
        buf.extend(scores[done:i])
        done = i
        iv2 = lower_pi(buf, alpha, g_uniform(i, delta))
        iv3 = pac3_lower_pi(buf, alpha, cz, i) if i >= cz.config.m else None
        for x, fx, sx in zip(grid, f_grid, s_grid):
            d2 = response_interval(lambda _: fx, lambda _: sx, x, iv2)
            if iv3 is not None:
                d3 = response_interval(lambda _: fx, lambda _: sx, x, iv3)
                p3 = [d3.lower, d3.upper]
                s3 = [iv3.lower, iv3.upper]
            else:
                p3 = s3 = [math.nan, math.nan]
            rt, st = float(r_true(x)), float(sigma_true(x))
            rows.append([i, float(x), float(fx), float(sx), d2.lower, d2.upper,
                         *p3, iv2.lower, iv2.upper, *s3,
                         rt, rt + st * q_lo, rt + st * q_hi])
    return header, rows


# -- IID-bounded demo -------------------------------------------------------

def iid_bounded_demo(dist: str, alpha: float, delta: float, eps: float,
                     streams: int, n_max: int, seed: int, start: int = 10,
                     ratio: float = 1.2):
    """Daily counts ``X_t = lambda(t) + Z_t`` with a rate estimate off by at
    most ``eps``; the residuals ``E_t = Z_t + eps_t`` are IID bounded.

    Coverage is reported for the next day's residual and for the worst
    admissible shift (``eps_t = -eps`` or ``+eps``).
    """
    law = noise_law(dist)
    k = BoundingConstants.additive(eps)
    sched = checkpoints(start, n_max, ratio)
    data_seed = substream_seed(seed, "data")
    t_all = np.arange(1, n_max + 2)
    shift = eps * np.cos(2.0 * np.pi * t_all / 365.0)  # lambda - lambda_hat

    def cover(lo, hi, sh):
        return float(law.cdf(hi - sh) - law.cdf(lo - sh))

    header = ["stream", "i", "corr_lower", "corr_upper", "raw_lower", "raw_upper",
              "corr_cov_next", "corr_cov_worst", "raw_cov_next", "raw_cov_worst"]
    rows = []
    fails = {"corrected": 0, "uncorrected": 0}
    for s in range(streams):
        z = sample_noise(dist, replicate_generator(data_seed, s), n_max)
        e = z + shift[:n_max]
        buf = SampleBuffer()
        done = 0
        ok = {"corrected": True, "uncorrected": True}
        for i in sched:
            buf.extend(e[done:i])
            done = i
            g = g_uniform(i, delta)
            _, corr = iid_bounded_interval(buf, alpha, g, k)
            raw = lower_pi(buf, alpha, g)
            nxt = shift[i]
            cc = [cover(corr.lower, corr.upper, sh) for sh in (nxt, -eps, eps)]
            rc = [cover(raw.lower, raw.upper, sh) for sh in (nxt, -eps, eps)]
            ok["corrected"] &= min(cc[1:]) >= 1 - alpha
            ok["uncorrected"] &= min(rc[1:]) >= 1 - alpha
            rows.append([s, i, corr.lower, corr.upper, raw.lower, raw.upper,
                         cc[0], min(cc[1:]), rc[0], min(rc[1:])])
        for key in fails:
            fails[key] += not ok[key]
    summary = {f"{key}_failure_rate": v / streams for key, v in fails.items()}
    return header, rows, summary


__all__ = [
    "CoverageSummary",
    "DISTRIBUTIONS",
    "bound_table",
    "calibrate",
    "checkpoints",
    "coverage_run",
    "iid_bounded_demo",
    "noise_law",
    "regression_demo",
    "sample_noise",
]
