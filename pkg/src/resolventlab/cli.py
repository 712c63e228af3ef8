"""Command-line interface.

Subcommands mirror the package's workflow: evaluate a density on a grid,
draw samples of a matrix statistic, run or list experiments, fit a
survival tail, check a reciprocal symmetry, and summarize a run directory.

Exit codes: 0 success, 2 validation error (bad flags, bad config fields,
bad domains), 3 partial results (a worker failed mid-run).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import densities, ensembles, harness, resolvent, stats
from .special_fns import DomainError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3

_SYMMETRY_FLAGS = {
    "inv": "reciprocal",
    "inv-conj": "reciprocal_conjugate",
    "sqrt2-inv": "sqrt2_reciprocal",
}


def _parse_pair(text: str) -> complex:
    """'0.7,0' or '0.7' -> complex."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're' or 're,im', got {text!r}")


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected 'start:stop:count', got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'start:stop:count', got {text!r}")
    if count < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points")
    return np.linspace(start, stop, count)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resolventlab",
        description="Resolvent-statistics laboratory for non-Hermitian "
        "random matrices: densities, exact samplers, experiments.",
    )
    parser.add_argument("--seed", type=int, default=None, help="base seed override")
    parser.add_argument(
        "--workers", type=int, default=None, help="worker process count override"
    )
    parser.add_argument(
        "--out", type=str, default=None, help="output file or directory override"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="evaluate a distribution model on a grid")
    p.add_argument(
        "--model",
        required=True,
        choices=[
            "finite_n",
            "regime1",
            "regime2",
            "regime3",
            "student",
            "gaussian",
            "invgamma",
            "cauchy",
        ],
    )
    p.add_argument("--grid", required=True, type=_parse_grid, metavar="START:STOP:COUNT")
    p.add_argument("--N", type=int, help="matrix size (finite_n)")
    p.add_argument("--r", type=float, help="spectral radius |z| (finite_n)")
    p.add_argument("--alpha", type=float, help="edge-window parameter (regime3)")
    p.add_argument("--beta", type=float, help="scale (student, invgamma)")
    p.add_argument("--center", type=_parse_pair, help="center c (student, gaussian)")
    p.add_argument("--var", type=float, help="variance (gaussian)")
    p.add_argument("--nu", type=float, help="shape (invgamma)")
    p.add_argument("--location", type=float, help="location (cauchy)")
    p.add_argument("--scale", type=float, help="scale (cauchy)")

    p = sub.add_parser("sample", help="draw matrix-statistic samples to CSV")
    p.add_argument(
        "--ensemble",
        required=True,
        choices=sorted(harness._ENSEMBLE_VARIANTS),
    )
    p.add_argument("--N", required=True, type=int)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument(
        "--statistic",
        default="g11",
        choices=["g11", "stieltjes_trace", "spectral_radius", "eigenvalues"],
    )
    p.add_argument("--z", type=_parse_pair, default=complex(0.0))
    p.add_argument("--count", required=True, type=int)

    p = sub.add_parser("experiment", help="run or list experiments")
    esub = p.add_subparsers(dest="experiment_command", required=True)
    pr = esub.add_parser("run", help="run an experiment from a config file")
    pr.add_argument("config", help="JSON config path, or a built-in experiment name")
    pr.add_argument(
        "--full", action="store_true", help="paper-scale sizes instead of desk scale"
    )
    esub.add_parser("list", help="list experiments")

    p = sub.add_parser("fit-tail", help="power-law tail fit of a sample CSV")
    p.add_argument("csv", help="sample file (index, re, im)")
    p.add_argument("--center", type=_parse_pair, default=complex(0.0))
    p.add_argument("--q-lo", type=float, default=0.95)
    p.add_argument("--q-hi", type=float, default=0.999)

    p = sub.add_parser("check-symmetry", help="reciprocal-symmetry KS check of a CSV")
    p.add_argument("csv", help="sample file (index, re, im)")
    p.add_argument("--map", required=True, choices=sorted(_SYMMETRY_FLAGS))

    p = sub.add_parser("report", help="summarize a run directory")
    p.add_argument("dir", help="directory containing report.json")

    return parser


def _require(args, names, model):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join(f"--{n}" for n in missing)
        raise ValueError(f"model {model!r} requires {flags}")


def _cmd_density(args) -> int:
    grid = args.grid
    model = args.model
    if model == "finite_n":
        _require(args, ("N", "r"), model)
        law = densities.FiniteNVarianceLaw(args.N, args.r)
    elif model == "regime1":
        law = densities.Regime1Limit()
    elif model == "regime2":
        law = densities.Regime2VarianceLaw()
    elif model == "regime3":
        _require(args, ("alpha",), model)
        law = densities.Regime3VarianceLaw(args.alpha)
    elif model == "student":
        _require(args, ("beta", "center"), model)
        law = densities.ComplexStudent(args.beta, args.center)
    elif model == "gaussian":
        _require(args, ("var", "center"), model)
        law = densities.ComplexGaussian(args.center, args.var)
    elif model == "invgamma":
        _require(args, ("nu", "beta"), model)
        law = densities.InverseGamma(args.nu, args.beta)
    else:
        _require(args, ("location", "scale"), model)
        law = densities.CauchyHermitian(args.location, args.scale)

    if isinstance(law, (densities.ComplexStudent, densities.ComplexGaussian)):
        points = grid.astype(complex)  # along the real axis through the plane
    else:
        points = grid
    values = densities.pdf(law, points)

    out = sys.stdout if args.out is None else open(args.out, "w")
    try:
        out.write("x,pdf\n")
        for x, p in zip(grid, np.atleast_1d(values)):
            out.write(f"{float(x)!r},{float(p)!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
            print(f"wrote {len(grid)} rows to {args.out}")
    return EXIT_OK


def _cmd_sample(args) -> int:
    cls, fields = harness._ENSEMBLE_VARIANTS[args.ensemble]
    kwargs = {"N": args.N}
    if "tau" in fields:
        kwargs["tau"] = args.tau
    spec = cls(**kwargs)
    seed = 0 if args.seed is None else args.seed
    workers = 1 if args.workers is None else args.workers
    values, rejected = harness.sample_statistic(
        spec, args.statistic, complex(args.z), args.count, seed, workers
    )
    path = args.out or f"{args.ensemble}_{args.statistic}_samples.csv"
    stats.write_samples_csv(path, values, args.statistic)
    print(
        f"wrote {values.size} samples to {path}"
        + (f" ({rejected} rejected draws)" if rejected else "")
    )
    return EXIT_OK


def _cmd_experiment_run(args) -> int:
    path = Path(args.config)
    if path.exists():
        config = harness.load_config(
            path,
            full=args.full,
            seed=args.seed,
            workers=args.workers,
            output_dir=args.out,
        )
    elif args.config in harness.EXPERIMENTS:
        config = harness.default_config(args.config, full=args.full)
        if args.seed is not None:
            config.seed = args.seed
        if args.workers is not None:
            config.workers = args.workers
        if args.out is not None:
            config.output_dir = Path(args.out)
    else:
        raise harness.ConfigError(
            "experiment", f"no config file {args.config!r} and no such experiment"
        )
    report = harness.run(config)
    print(f"experiment : {report.experiment}")
    print(f"samples    : {config.n_samples} (seed {config.seed})")
    print(f"rejections : {report.rejections}")
    print(f"report     : {Path(config.output_dir) / 'report.json'}")
    for line in _summary_lines(report.results):
        print(f"  {line}")
    return EXIT_OK


def _summary_lines(results: dict, prefix: str = "") -> list:
    lines = []
    for key, value in results.items():
        if isinstance(value, dict):
            lines.extend(_summary_lines(value, prefix=f"{prefix}{key}."))
        elif isinstance(value, float):
            lines.append(f"{prefix}{key} = {value:.6g}")
        elif isinstance(value, list) and value and all(
            isinstance(x, (int, float)) for x in value
        ) and len(value) == 2:
            # pairs are complex values, except quantile windows
            if key.endswith("window"):
                lines.append(f"{prefix}{key} = [{value[0]:g}, {value[1]:g}]")
            else:
                lines.append(f"{prefix}{key} = {value[0]:.6g} + {value[1]:.6g}i")
        elif isinstance(value, (int, str)):
            lines.append(f"{prefix}{key} = {value}")
    return lines


def _cmd_experiment_list() -> int:
    width = max(len(name) for name in harness.experiment_names())
    for name, description in harness.describe_experiments():
        print(f"{name:<{width}}  {description}")
    return EXIT_OK


def _cmd_fit_tail(args) -> int:
    values = stats.read_samples_csv(args.csv)
    fit = stats.tail_fit(values, complex(args.center), args.q_lo, args.q_hi)
    print(f"n          : {values.size}")
    print(f"window     : [{fit.window[0]}, {fit.window[1]}] quantiles, {fit.n_points} points")
    print(f"slope      : {fit.slope:.4f} (stderr {fit.stderr_slope:.4f})")
    print(f"amplitude  : {fit.amplitude:.4f} (log {fit.log_amplitude:.4f})")
    return EXIT_OK


def _cmd_check_symmetry(args) -> int:
    values = stats.read_samples_csv(args.csv)
    report = stats.inversion_symmetry(values, _SYMMETRY_FLAGS[args.map])
    print(f"map        : {report.map_kind}")
    print(f"n          : {report.n} ({report.n_dropped} dropped)")
    print(f"ks modulus : {report.ks_modulus:.4f}")
    print(f"ks argument: {report.ks_argument:.4f}")
    if report.warn_dropped:
        print("warning    : more than 1% of values near zero were dropped")
    return EXIT_OK


def _cmd_report(args) -> int:
    path = Path(args.dir) / "report.json"
    if not path.exists():
        raise ValueError(f"no report.json under {args.dir!r}")
    payload = json.loads(path.read_text())
    print(f"experiment : {payload['experiment']}")
    cfg = payload.get("config", {})
    print(f"config     : n_samples={cfg.get('n_samples')} seed={cfg.get('seed')}")
    print(f"rejections : {payload.get('rejections')}")
    print(f"wall       : {payload.get('timing', {}).get('wall_seconds', 0):.1f}s")
    print(f"files      : {', '.join(payload.get('files', []))}")
    for line in _summary_lines(payload.get("results", {})):
        print(f"  {line}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "density":
            return _cmd_density(args)
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "experiment":
            if args.experiment_command == "list":
                return _cmd_experiment_list()
            return _cmd_experiment_run(args)
        if args.command == "fit-tail":
            return _cmd_fit_tail(args)
        if args.command == "check-symmetry":
            return _cmd_check_symmetry(args)
        if args.command == "report":
            return _cmd_report(args)
        parser.error(f"unknown command {args.command!r}")
    except harness.PartialResultsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except (harness.ConfigError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
