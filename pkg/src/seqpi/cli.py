"""Command-line entry point: ``seqpi <subcommand> [flags]``.

Every subcommand writes CSV (comma separated, ``#`` comment header that
echoes the full configuration) and is deterministic given its flags.
Exit status: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    DISTRIBUTIONS,
    bound_table,
    calibrate,
    coverage_run,
    iid_bounded_demo,
    regression_demo,
)
from .pac3 import CZEstimate, SimulationConfig, estimate_cz, simulate_z_sample


class UsageError(Exception):
    pass


@contextlib.contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write_csv(fh, command, args, header, rows, footer=()):
    fh.write(f"# seqpi {__version__} {command}\n")
    for key, value in sorted(vars(args).items()):
        if key in ("func", "command"):
            continue
        fh.write(f"# {key}={value}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    for line in footer:
        fh.write(f"# {line}\n")


def _load_calibration(path, alpha=None):
    try:
        cz = CZEstimate.from_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read calibration {path}: {exc}") from exc
    if alpha is not None and not np.isclose(cz.config.p, alpha / 2):
        raise UsageError(
            f"calibration has p={cz.config.p}, but --alpha {alpha} needs p={alpha / 2}"
        )
    return cz


def _calibration_for_interval(args):
    if args.calibration:
        return _load_calibration(args.calibration, args.alpha)
    return calibrate(args.alpha, args.delta, args.delta_tilde, args.m, args.M,
                     args.replicates, args.seed)


def cmd_bound_table(args):
    if args.calibration:
        cz = _load_calibration(args.calibration)
    else:
        cfg = SimulationConfig(args.p, args.delta, args.delta_tilde, args.m, args.M,
                               args.replicates, args.seed)
        cz = estimate_cz(cfg)
    t_max = args.t_max or 10 * cz.config.M
    header, rows = bound_table(cz, t_max, args.points, args.trajectories, args.seed)
    with _open_out(args.out) as fh:
        _write_csv(fh, "bound-table", args, header, rows,
                   footer=[f"c_z={cz.c_z!r}"])


def cmd_simulate_cz(args):
    cfg = SimulationConfig(args.p, args.delta, args.delta_tilde, args.m, args.M,
                           args.replicates, args.seed, delta_split=args.delta_split)
    z = simulate_z_sample(cfg, workers=args.workers)
    cz = estimate_cz(cfg, z=z)
    rows = [[r, float(v)] for r, v in enumerate(z)]
    with _open_out(args.out) as fh:
        _write_csv(fh, "simulate-cz", args, ["replicate", "z"], rows,
                   footer=[f"c_z={cz.c_z!r}", f"epsilon={cz.epsilon!r}"])
    json_path = args.json or (Path(args.out).with_suffix(".json")
                              if args.out and args.out != "-" else None)
    if json_path:
        Path(json_path).write_text(cz.to_json(), encoding="utf-8")
    else:
        sys.stderr.write(cz.to_json())


def cmd_coverage(args):
    cz = _calibration_for_interval(args) if args.regime == "three-pac" else None
    header, rows, summary = coverage_run(
        args.dist, args.alpha, args.delta, args.streams, args.n_max, args.seed,
        regime=args.regime, cz=cz, start=args.start,
    )
    footer = [
        f"streams={summary.streams}",
        f"lower_failure_rate={summary.lower_failure_rate!r}",
    ]
    if args.regime == "two-pac":
        footer.append(f"sandwich_failure_rate={summary.sandwich_failure_rate!r}")
    if cz is not None:
        footer.append(f"c_z={cz.c_z!r}")
    with _open_out(args.out) as fh:
        _write_csv(fh, "coverage", args, header, rows, footer)
    sys.stderr.write("\n".join(footer) + "\n")


def cmd_regression_demo(args):
    cz = _calibration_for_interval(args)
    counts = sorted({int(c) for c in args.sample_counts.split(",")})
    header, rows = regression_demo(
        args.dist, args.alpha, args.delta, args.n_train, counts, cz, args.seed,
        bandwidth=args.bandwidth, grid_points=args.grid,
    )
    with _open_out(args.out) as fh:
        _write_csv(fh, "regression-demo", args, header, rows,
                   footer=[f"c_z={cz.c_z!r}"])


def cmd_iid_bounded_demo(args):
    header, rows, summary = iid_bounded_demo(
        args.dist, args.alpha, args.delta, args.eps, args.streams, args.n_max,
        args.seed, start=args.start,
    )
    footer = [f"{k}={v!r}" for k, v in summary.items()]
    with _open_out(args.out) as fh:
        _write_csv(fh, "iid-bounded-demo", args, header, rows, footer)
    sys.stderr.write("\n".join(footer) + "\n")


def _unit(name):
    def parse(text):
        v = float(text)
        if not 0.0 < v < 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie in (0, 1)")
        return v
    return parse


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a non-negative 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqpi", allow_abbrev=False,
        description="Anytime-valid sequential prediction intervals.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, alpha=True, sim=True):
        if alpha:
            p.add_argument("--alpha", type=_unit("alpha"), default=0.1)
        p.add_argument("--delta", type=_unit("delta"), default=0.05)
        if sim:
            p.add_argument("--delta-tilde", type=_unit("delta-tilde"), default=1e-7)
            p.add_argument("--m", type=_positive_int, default=10,
                           help="first time covered by the simulated band")
            p.add_argument("--M", type=_positive_int, default=10_000,
                           help="end of the simulated window")
            p.add_argument("--replicates", type=_positive_int, default=100_000)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--out", default=None, help="output CSV (default stdout)")

    p = sub.add_parser("bound-table", help="analytic and stitched bands over t")
    common(p, alpha=False)
    p.add_argument("--p", type=_unit("p"), default=0.05)
    p.add_argument("--t-max", type=_positive_int, default=None)
    p.add_argument("--points", type=_positive_int, default=200)
    p.add_argument("--trajectories", type=int, default=0)
    p.add_argument("--calibration", default=None, help="frozen c_Z JSON")
    p.set_defaults(func=cmd_bound_table)

    p = sub.add_parser("simulate-cz", help="simulate Z and estimate c_Z")
    common(p, alpha=False)
    p.add_argument("--p", type=_unit("p"), default=0.05)
    p.add_argument("--delta-split", type=_positive_int, default=2)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--json", default=None, help="c_Z JSON path (default OUT.json)")
    p.set_defaults(func=cmd_simulate_cz)

    p = sub.add_parser("coverage", help="true coverage along independent streams")
    common(p)
    p.add_argument("--dist", choices=DISTRIBUTIONS, default="normal")
    p.add_argument("--streams", type=_positive_int, default=500)
    p.add_argument("--n-max", type=_positive_int, default=5000)
    p.add_argument("--start", type=_positive_int, default=10)
    p.add_argument("--regime", choices=("two-pac", "three-pac"), default="two-pac")
    p.add_argument("--calibration", default=None, help="frozen c_Z JSON")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("regression-demo", help="conformal bands for sin(3x)")
    common(p)
    p.add_argument("--dist", choices=("normal", "lognormal"), default="normal")
    p.add_argument("--bandwidth", type=float, default=1 / 500)
    p.add_argument("--n-train", type=_positive_int, default=5000)
    p.add_argument("--sample-counts", default="100,1000,5000")
    p.add_argument("--grid", type=_positive_int, default=101)
    p.add_argument("--calibration", default=None, help="frozen c_Z JSON")
    p.set_defaults(func=cmd_regression_demo)

    p = sub.add_parser("iid-bounded-demo", help="rate-function residual example")
    common(p, sim=False)
    p.add_argument("--dist", choices=DISTRIBUTIONS, default="normal")
    p.add_argument("--eps", type=float, default=0.2,
                   help="uniform bound on the rate-estimate error")
    p.add_argument("--streams", type=_positive_int, default=200)
    p.add_argument("--n-max", type=_positive_int, default=5000)
    p.add_argument("--start", type=_positive_int, default=10)
    p.set_defaults(func=cmd_iid_bounded_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "bandwidth", 1.0) <= 0:
        parser.error("--bandwidth must be positive")
    if getattr(args, "eps", 0.0) < 0:
        parser.error("--eps must be non-negative")
    if hasattr(args, "M") and args.m >= args.M:
        parser.error("--m must be smaller than --M")
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except ValueError as exc:
        # configuration rejected by the library (e.g. too few replicates)
        parser.error(str(exc))
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"seqpi: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
