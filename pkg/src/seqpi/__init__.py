"""Anytime-valid sequential prediction intervals."""

__version__ = "0.1.0"

from .bounds import (
    DecayBoundParams,
    bennett_epsilon,
    bennett_tail,
    g_decay,
    g_decay_frac,
    g_uniform,
    riemann_zeta,
)
from .conformal import KernelEstimator, response_interval, score
from .empirical import SampleBuffer
from .iid_bounded import BoundingConstants, iid_bounded_interval, quantile_sandwich
from .intervals import (
    AlphaStar,
    PredictionInterval,
    Regime,
    alpha_star,
    lower_pi,
    true_coverage,
    upper_pi,
)
from .pac3 import (
    CZEstimate,
    SimulationConfig,
    estimate_cz,
    pac3_lower_pi,
    simulate_z,
    stitched_band,
)

__all__ = [
    "AlphaStar",
    "BoundingConstants",
    "CZEstimate",
    "DecayBoundParams",
    "KernelEstimator",
    "PredictionInterval",
    "Regime",
    "SampleBuffer",
    "SimulationConfig",
    "alpha_star",
    "bennett_epsilon",
    "bennett_tail",
    "estimate_cz",
    "g_decay",
    "g_decay_frac",
    "g_uniform",
    "iid_bounded_interval",
    "lower_pi",
    "pac3_lower_pi",
    "quantile_sandwich",
    "response_interval",
    "riemann_zeta",
    "score",
    "simulate_z",
    "stitched_band",
    "true_coverage",
    "upper_pi",
]
