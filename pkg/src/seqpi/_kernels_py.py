"""Pure numpy fallback for :mod:`seqpi._kernels`.

Produces bit-identical output: the same IEEE operations on the same
operands, vectorised across the path instead of looped.
"""

import numpy as np

from .streams import replicate_generator


def path_min_ratio(uniforms, p, m, denom):
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    denom = np.ascontiguousarray(denom, dtype=np.float64)
    n_steps = uniforms.shape[1]
    if denom.shape[0] < n_steps:
        raise ValueError("denom shorter than the path length")
    if m < 1 or m > n_steps:
        raise ValueError("m must lie in [1, path length]")
    counts = np.cumsum(uniforms < p, axis=1, dtype=np.int64)
    t = np.arange(1, n_steps + 1, dtype=np.float64)
    ratio = (counts[:, m - 1:] - p * t[m - 1:]) / denom[m - 1:n_steps]
    return ratio.min(axis=1)


def stream_min_ratio(seed, start, stop, p, m, denom, batch=256):
    denom = np.ascontiguousarray(denom, dtype=np.float64)
    out = np.empty(stop - start)
    u = np.empty((min(batch, max(stop - start, 0)), denom.shape[0]))
    for a in range(start, stop, batch):
        b = min(a + batch, stop)
        for row, r in enumerate(range(a, b)):
            replicate_generator(seed, r).random(out=u[row])
        out[a - start:b - start] = path_min_ratio(u[:b - a], p, m, denom)
    return out
