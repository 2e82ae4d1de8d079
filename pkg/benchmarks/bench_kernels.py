"""Compiled vs numpy kernels for the Z simulation.

    python3 benchmarks/bench_kernels.py [--replicates N] [--M M] [--repeat R]
"""

import argparse
import importlib
import time

import numpy as np

from seqpi import _kernels_py
from seqpi.pac3 import SimulationConfig


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=5000)
    ap.add_argument("--M", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        ext = importlib.import_module("seqpi._kernels")
    except ImportError:
        ext = None
        print("compiled kernels not built; timing the numpy fallback only")

    cfg = SimulationConfig(p=0.05, delta=0.05, delta_tilde=1e-7, m=10, M=args.M,
                           replicates=max(args.replicates, 10_000))
    denom = cfg.denominators()
    n, steps = args.replicates, args.M
    u = np.random.default_rng(0).random((min(n, 1000), steps))

    cases = [
        ("stream_min_ratio", n * steps,
         lambda mod: lambda: mod.stream_min_ratio(0, 0, n, cfg.p, cfg.m, denom)),
        ("path_min_ratio", u.size,
         lambda mod: lambda: mod.path_min_ratio(u, cfg.p, cfg.m, denom)),
    ]
    print(f"{'kernel':<18}{'backend':<9}{'seconds':>10}{'Msteps/s':>11}{'speedup':>9}")
    for name, work, make in cases:
        t_py, out_py = best_of(make(_kernels_py), args.repeat)
        print(f"{name:<18}{'python':<9}{t_py:>10.3f}{work / t_py / 1e6:>11.1f}{'':>9}")
        if ext is not None:
            t_c, out_c = best_of(make(ext), args.repeat)
            same = np.array_equal(out_c, out_py)
            print(f"{name:<18}{'cython':<9}{t_c:>10.3f}{work / t_c / 1e6:>11.1f}"
                  f"{t_py / t_c:>8.2f}x" + ("" if same else "  OUTPUT DIFFERS"))


if __name__ == "__main__":
    main()
