"""Monte-Carlo calibration of the single-quantile band.

For ``S_t = sum_{i<=t} (1{X_i <= Q(p)} - p)`` the normalised path minimum

    Z = min_{t in [m, M]} S_t / (t g_t)

is simulated directly as a Bernoulli(p) walk (exact for continuous laws).
``c_Z`` is minus a conservative empirical quantile of ``Z``; ``c_Z g_t``
replaces the analytic band on ``[m, M]`` and the analytic decay band takes
over for ``t > M``. The inner band ``g_t`` is the decay band anchored at
``m``, so it is defined on the whole simulated window.

Replicate ``r`` draws from its own counter-based stream (see
:mod:`seqpi.streams`), so any subset of replicates can be regenerated, in
any order or thread.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import kernels
from .bounds import DEFAULT_ETA, DEFAULT_S, DecayBoundParams, bennett_epsilon, g_decay
from .empirical import SampleBuffer
from .intervals import PredictionInterval, Regime, lower_pi
from .streams import replicate_generator

__all__ = [
    "CZEstimate",
    "SimulationConfig",
    "estimate_cz",
    "pac3_band",
    "pac3_lower_pi",
    "replicate_generator",
    "simulate_z",
    "simulate_z_sample",
    "stitched_band",
    "stitched_crossing_rate",
    "z_draws",
]

@dataclass(frozen=True)
class SimulationConfig:
    p: float
    delta: float
    delta_tilde: float
    m: int
    M: int
    replicates: int = 100_000
    seed: int = 0
    s: float = DEFAULT_S
    eta: float = DEFAULT_ETA
    # Share of delta given to the simulated window: delta / delta_split.
    # 2 for a single quantile, 4 for a two-sided prediction interval.
    delta_split: int = 2

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 < self.delta_tilde < 1.0:
            raise ValueError("delta_tilde must lie in (0, 1)")
        if not 1 <= self.m < self.M:
            raise ValueError("need 1 <= m < M")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.delta_split < 1:
            raise ValueError("delta_split must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        if self.quantile_level <= 0.0:
            raise ValueError(
                f"{self.replicates} replicates leave no room for the Bennett slack "
                f"(delta level {self.delta_level:g}, slack {self.epsilon:g}); "
                "increase replicates"
            )

    @property
    def delta_level(self) -> float:
        return self.delta / self.delta_split

    @property
    def epsilon(self) -> float:
        return bennett_epsilon(self.replicates, self.delta_level, self.delta_tilde)

    @property
    def quantile_level(self) -> float:
        return self.delta_level - self.epsilon

    @property
    def band_params(self) -> DecayBoundParams:
        """Decay band used inside ``[m, M]``, anchored at ``m``."""
        return DecayBoundParams(self.p, self.delta_level, self.s, self.eta, self.m)

    @property
    def tail_params(self) -> DecayBoundParams:
        """Analytic band for ``t > M``, anchored at ``M``."""
        return DecayBoundParams(self.p, self.delta_level, self.s, self.eta, self.M)

    def denominators(self, horizon: int | None = None) -> np.ndarray:
        """``t * g_t`` for ``t = 1..horizon`` (ones before ``m``)."""
        horizon = self.M if horizon is None else horizon
        out = np.ones(horizon)
        t = np.arange(self.m, horizon + 1)
        out[self.m - 1:] = g_decay(t, self.band_params)
        return out


@dataclass(frozen=True)
class CZEstimate:
    c_z: float
    replicates: int
    epsilon: float
    config: SimulationConfig

    def __post_init__(self):
        if not math.isfinite(self.c_z):
            raise ValueError("c_z must be finite")

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "p": cfg.p,
            "delta": cfg.delta,
            "delta_tilde": cfg.delta_tilde,
            "m": cfg.m,
            "M": cfg.M,
            "replicates": self.replicates,
            "seed": cfg.seed,
            "eta": cfg.eta,
            "s": cfg.s,
            "epsilon": self.epsilon,
            "c_z": self.c_z,
            "delta_split": cfg.delta_split,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CZEstimate":
        cfg = SimulationConfig(
            p=d["p"], delta=d["delta"], delta_tilde=d["delta_tilde"], m=d["m"],
            M=d["M"], replicates=d["replicates"], seed=d["seed"], s=d["s"],
            eta=d["eta"], delta_split=d.get("delta_split", 2),
        )
        return cls(float(d["c_z"]), int(d["replicates"]), float(d["epsilon"]), cfg)

    @classmethod
    def from_json(cls, text: str) -> "CZEstimate":
        return cls.from_dict(json.loads(text))


Band = Union[Callable[[int], float], np.ndarray]


def simulate_z(rng: np.random.Generator, p: float, m: int, M: int,
               band: Band) -> float:
    """One draw of ``min_{t in [m, M]} S_t / (t band(t))``.

    ``band`` is a callable ``t -> g_t`` or an array indexed by ``t - 1``.
    """
    if not 1 <= m <= M:
        raise ValueError("need 1 <= m <= M")
    t = np.arange(1, M + 1, dtype=np.float64)
    if callable(band):
        g = np.ones(M)
        g[m - 1:] = [band(int(k)) for k in range(m, M + 1)]
    else:
        g = np.asarray(band, dtype=np.float64)[:M]
    if np.any(g[m - 1:] <= 0):
        raise ValueError("band must be positive on [m, M]")
    u = rng.random((1, M))
    return float(kernels.path_min_ratio(u, p, m, t * g)[0])


def z_draws(seed: int, start: int, count: int, p: float, m: int,
            denom: np.ndarray, *, batch: int = 256, workers: int = 1) -> np.ndarray:
    """Path minima of ``S_t / denom[t-1]`` over ``t in [m, len(denom)]`` for
    replicates ``start .. start + count - 1``.

    Output depends only on ``seed`` and the replicate indices, not on
    ``batch`` or ``workers``.
    """
    denom = np.ascontiguousarray(denom, dtype=np.float64)
    bounds = [(a, min(a + batch, start + count))
              for a in range(start, start + count, batch)]

    def run(ab):
        return kernels.stream_min_ratio(seed, ab[0], ab[1], p, m, denom)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, bounds))
    else:
        parts = [run(ab) for ab in bounds]
    return np.concatenate(parts) if parts else np.empty(0)


def simulate_z_sample(config: SimulationConfig, start: int = 0,
                      count: int | None = None, **kwargs) -> np.ndarray:
    """Z draws for replicates ``start .. start + count - 1`` of ``config``."""
    count = config.replicates - start if count is None else count
    return z_draws(config.seed, start, count, config.p, config.m,
                   config.denominators(), **kwargs)


def estimate_cz(config: SimulationConfig, z: np.ndarray | None = None,
                **sim_kwargs) -> CZEstimate:
    """``c_Z = -Q_Z(delta_level - eps)`` over the replicate sample."""
    if z is None:
        z = simulate_z_sample(config, **sim_kwargs)
    if len(z) != config.replicates:
        raise ValueError(f"expected {config.replicates} Z draws, got {len(z)}")
    eps = config.epsilon
    level = config.delta_level - eps
    if level <= 0:
        raise ValueError("Bennett slack exceeds the delta level; increase replicates")
    q = SampleBuffer(z).upper_quantile(level)
    return CZEstimate(-q, config.replicates, eps, config)


def stitched_band(t, cz: CZEstimate):
    """``c_Z g_t`` on ``[m, M]``, analytic decay band for ``t > M``."""
    cfg = cz.config
    t_arr = np.asarray(t, dtype=np.int64)
    if np.any(t_arr < cfg.m):
        raise ValueError(f"stitched band needs t >= m = {cfg.m}")
    inner = np.minimum(t_arr, cfg.M)
    outer = np.maximum(t_arr, cfg.M)
    val = np.where(
        t_arr <= cfg.M,
        cz.c_z * g_decay(inner, cfg.band_params) / inner,
        g_decay(outer, cfg.tail_params) / outer,
    )
    return float(val) if val.ndim == 0 else val


def pac3_band(t, cz: CZEstimate):
    """Stitched band with ``|c_Z|`` in place of ``c_Z``."""
    if cz.c_z >= 0:
        return stitched_band(t, cz)
    return stitched_band(t, CZEstimate(-cz.c_z, cz.replicates, cz.epsilon, cz.config))


def pac3_lower_pi(buf: SampleBuffer, alpha: float, cz: CZEstimate,
                  i: int | None = None) -> PredictionInterval:
    """Lower interval with the simulated band ``|c_Z| g_i``.

    ``cz`` must be calibrated at ``p = alpha / 2``; use ``delta_split=4`` so
    both tails and both windows share ``delta``.
    """
    if not math.isclose(cz.config.p, alpha / 2, rel_tol=1e-12):
        raise ValueError(
            f"c_Z was calibrated at p={cz.config.p}, interval needs p=alpha/2={alpha / 2}"
        )
    i = len(buf) if i is None else i
    g = pac3_band(i, cz)
    return lower_pi(buf, alpha, g, regime=Regime.THREE_PAC)


def stitched_crossing_rate(cz: CZEstimate, n_paths: int, horizon: int,
                           seed: int, **sim_kwargs) -> float:
    """Fraction of fresh paths with ``S_t / t < -stitched_band(t)`` for some
    ``t in [m, horizon]``."""
    cfg = cz.config
    t = np.arange(cfg.m, horizon + 1)
    band = np.asarray(stitched_band(t, cz))
    if np.any(band <= 0):
        raise ValueError("stitched band must be positive (c_Z <= 0?)")
    denom = np.ones(horizon)
    denom[cfg.m - 1:] = t * band
    z = z_draws(seed, 0, n_paths, cfg.p, cfg.m, denom, **sim_kwargs)
    return float(np.mean(z < -1.0))
