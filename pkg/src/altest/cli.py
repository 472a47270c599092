"""Command-line harness.

Commands: gen (write a dataset file), run (trial batch to CSV), summarize
(aggregate a results CSV), geometry (width / compatibility / covariance-factor
report), bounds (oracle and floor error levels).

Exit codes: 0 success, 2 configuration error, 3 runtime or numeric error.
"""

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .dataio import write_dataset
from .errors import AltEstError, ConfigError, InvalidParameterError
from .experiments import (
    METHODS,
    ExperimentConfig,
    format_summary,
    preset_config,
    run_experiment,
    summarize,
)
from .geometry import bound_values, geometry_report, noise_shape_factors
from .model import ModelSpec, make_block_sigma, make_sparse_theta, sample_dataset
from .rng import stream_rng

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {exc}")


def _method_list(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="altest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="sample a synthetic dataset and write it to a file")
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--s", type=int, required=True, help="support size of theta (even)")
    gen.add_argument("--rho", type=float, default=0.8, help="noise block correlation")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--stream", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)

    run = sub.add_parser("run", help="run an experiment batch")
    run.add_argument("--preset", choices=("fig1", "fig2", "custom"))
    run.add_argument("--config", type=Path, help="JSON config file; flags override it")
    run.add_argument("--seed", type=int)
    run.add_argument("--jobs", type=int)
    run.add_argument("--out", dest="out_dir", type=str)
    run.add_argument("--trials", type=int)
    run.add_argument("--p", type=int)
    run.add_argument("--s", type=int)
    run.add_argument("--m", type=int)
    run.add_argument("--rho", type=float)
    run.add_argument("--T", type=int)
    run.add_argument("--n-grid", dest="n_grid", type=_int_list)
    run.add_argument("--mn-budget", dest="mn_budget", type=int)
    run.add_argument("--m-grid", dest="m_grid", type=_int_list)
    run.add_argument("--methods", type=_method_list, help=f"subset of {','.join(METHODS)}")
    run.add_argument("--gamma-rule", dest="gamma_rule", choices=("oracle_noise", "plugin", "fixed"))
    run.add_argument("--gamma-scale", dest="gamma_scale", type=float)
    run.add_argument("--gamma-fixed", dest="gamma_fixed", type=float)
    run.add_argument("--solver-tol", dest="solver_tol", type=float)
    run.add_argument("--gnuplot", action="store_true", help="also write a plot script stub")

    summ = sub.add_parser("summarize", help="aggregate a results CSV")
    summ.add_argument("csv", type=Path)
    summ.add_argument("--json", action="store_true", help="print JSON instead of a table")

    geo = sub.add_parser("geometry", help="widths, norm compatibility, covariance factors")
    geo.add_argument("--p", type=int, required=True)
    geo.add_argument("--s", type=int, required=True)
    geo.add_argument("--m", type=int, required=True)
    geo.add_argument("--rho", type=float, default=0.8)
    geo.add_argument("--n", type=int, required=True)
    geo.add_argument("--samples", type=int, default=100_000)
    geo.add_argument("--seed", type=int, default=0)

    bnd = sub.add_parser("bounds", help="oracle error level and minimum achievable floor")
    bnd.add_argument("--p", type=int, required=True)
    bnd.add_argument("--s", type=int, required=True)
    bnd.add_argument("--m", type=int, required=True)
    bnd.add_argument("--rho", type=float, default=0.8)
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--samples", type=int, default=100_000)
    bnd.add_argument("--seed", type=int, default=0)
    bnd.add_argument("--kappa", type=float, default=1.0)
    bnd.add_argument("--kappa0", type=float, default=1.0)
    bnd.add_argument("--mu-max", dest="mu_max", type=float, default=1.0)
    bnd.add_argument("--mu-min", dest="mu_min", type=float, default=1.0)
    bnd.add_argument("--c1", type=float, default=1.0)
    bnd.add_argument("--c", type=float, default=1.0)
    return parser


def _spec_from_args(args) -> ModelSpec:
    sigma = make_block_sigma(args.m, args.rho) if args.rho != 0.0 else np.eye(args.m)
    return ModelSpec(args.p, args.m, make_sparse_theta(args.p, args.s), sigma, seed=args.seed)


def _cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    data = sample_dataset(spec, args.n, args.stream)
    write_dataset(args.out, data, seed=args.seed)
    print(f"wrote {data.n} observations (m={data.m}, p={data.p}) to {args.out}")
    return EXIT_OK


def _experiment_config(args) -> ExperimentConfig:
    file_values: dict = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError("config: top level must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in file_values:
        if key not in known:
            raise ConfigError(f"config: unknown field {key!r}")
    flag_values = {
        name: getattr(args, name)
        for name in known
        if getattr(args, name, None) is not None
    }
    merged = dict(file_values)
    merged.update(flag_values)
    preset = merged.pop("preset", "custom")
    for key in ("n_grid", "m_grid", "methods"):
        if key in merged and merged[key] is not None:
            merged[key] = tuple(merged[key])
    return preset_config(preset, **merged)


def _cmd_run(args) -> int:
    cfg = _experiment_config(args)
    summary = run_experiment(cfg, gnuplot=args.gnuplot)
    sys.stdout.write(format_summary(summary))
    print(f"results written under {cfg.out_dir}")
    return EXIT_OK


def _cmd_summarize(args) -> int:
    summary = summarize(args.csv)
    if args.json:
        json.dump(summary, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(format_summary(summary))
    return EXIT_OK


def _cmd_geometry(args) -> int:
    spec = _spec_from_args(args)
    rng = stream_rng(args.seed, 71)
    report = geometry_report(spec, None, args.n, args.samples, rng)
    diverged = not np.isfinite(report.e_min)
    out = {
        "xi_identity": report.xi_sigma,
        "xi_star": report.xi_star,
        "width_ball": {"value": report.width_ball.value, "se": report.width_ball.se},
        "width_cone": {"value": report.width_cone.value, "se": report.width_cone.se},
        "psi_analytic": report.psi.analytic,
        "psi_sampled_lower": report.psi.sampled_lower,
        "e_orc": report.e_orc,
        "e_min": None if diverged else report.e_min,
        "e_min_diverged": diverged,
        "mc_samples": report.mc_samples,
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    spec = _spec_from_args(args)
    rng = stream_rng(args.seed, 73)
    e_orc, e_min = bound_values(
        spec,
        args.n,
        kappa=args.kappa,
        mu_max=args.mu_max,
        mu_min=args.mu_min,
        c1=args.c1,
        c=args.c,
        kappa0=args.kappa0,
        samples=args.samples,
        rng=rng,
    )
    rho_ball, tau_ratio = noise_shape_factors(spec.sigma_star, spec.sigma_star)
    out = {
        "e_orc": e_orc,
        "e_min": e_min,
        "rho_ball_l2": rho_ball,
        "tau_frobenius_over_spectral": tau_ratio,
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "run": _cmd_run,
    "summarize": _cmd_summarize,
    "geometry": _cmd_geometry,
    "bounds": _cmd_bounds,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AltEstError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
