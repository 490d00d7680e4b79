"""Command line interface.

Subcommands:
  sweep       run a sigma sweep from a config file, emit CSV and optional plot
  mc          single-point capacity estimate for one sampled reservoir
  thresholds  print the regime thresholds implied by a config
  oracle      print the analytic linear capacity profile

Exit codes: 0 success, 1 configuration error, 2 numerical failure in all cells.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import capacity as cap
from . import dynamics as dyn
from . import experiment as exp
from .activations import parse_activation
from .ensembles import parse_ensemble, sample_reservoir
from .errors import ConfigError, MemcapError
from .seeding import derive_seed

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    # Argument mistakes are configuration errors (exit 1), not usage errors (exit 2).
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="memcap", description="Memory capacity of random echo state networks")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a sigma sweep from a config file")
    sweep.add_argument("--config", required=True, help="key = value config file")
    sweep.add_argument("--out", default=None, help="CSV output path")
    sweep.add_argument("--plot", default=None, help="vector-graphics plot path (svg/pdf)")
    sweep.add_argument("--seed", type=int, default=None, help="override base_seed")
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep.add_argument("--fixed-reservoir", action="store_true", help="reuse one reservoir draw per replication across the grid")

    mc = sub.add_parser("mc", help="single-point capacity estimate")
    mc.add_argument("--n", type=int, default=30)
    mc.add_argument("--ensemble", default="dense")
    mc.add_argument("--activation", default="tanh")
    mc.add_argument("--sigma", type=float, required=True)
    mc.add_argument("--spectral-norm", type=float, default=0.95)
    mc.add_argument("--length", type=int, default=100_000)
    mc.add_argument("--washout", type=int, default=None)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--tau-max", type=int, default=None)
    mc.add_argument("--ridge", type=float, default=None)
    mc.add_argument("--dump-trajectory", default=None, help="columnar state dump (large)")

    thresholds = sub.add_parser("thresholds", help="print regime thresholds for a config")
    thresholds.add_argument("--config", required=True)
    thresholds.add_argument("--seed", type=int, default=None, help="override base_seed")

    oracle = sub.add_parser("oracle", help="analytic linear capacity profile")
    oracle.add_argument("--n", type=int, default=30)
    oracle.add_argument("--ensemble", default="dense")
    oracle.add_argument("--spectral-norm", type=float, default=0.95)
    oracle.add_argument("--seed", type=int, default=0)
    oracle.add_argument("--tau-max", type=int, default=None)
    return parser


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = exp.load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.fixed_reservoir:
        cfg = replace(cfg, fixed_reservoir=True)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    result = exp.run_sweep(cfg, jobs=args.jobs)
    total_ok = sum(row.n_ok for row in result.rows)
    if args.out:
        exp.emit_csv(result, args.out)
    if args.plot:
        exp.emit_plot(result, args.plot)
    for row in result.rows:
        print(
            f"sigma={row.sigma:.6g} mc_mean={row.mc_mean:.6g} mc_sd={row.mc_sd:.6g} "
            f"ok={row.n_ok} failed={row.n_failed}"
        )
    if result.failures:
        print(f"{len(result.failures)} cell(s) failed; first reason: {result.failures[0][2]}", file=sys.stderr)
    if total_ok == 0:
        print("all cells failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_mc(args: argparse.Namespace) -> int:
    try:
        ensemble = parse_ensemble(args.ensemble)
        activation = parse_activation(args.activation)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.sigma <= 0.0:
        raise ConfigError("--sigma must be positive")
    spec = sample_reservoir(args.n, ensemble, args.spectral_norm, args.seed)
    washout = args.washout if args.washout is not None else dyn.default_washout(args.n)
    process = dyn.InputProcess(
        sigma=args.sigma,
        length=args.length,
        washout=washout,
        seed=derive_seed(args.seed, "inputs"),
    )
    traj = dyn.run(spec, activation, process)
    profile = cap.estimate_total_mc(traj, tau_max=args.tau_max, ridge=args.ridge)
    regime = dyn.classify_regime(traj, spec, activation, args.sigma)
    print(cap.profile_record(profile, args.sigma))
    print(f"regime={regime.value} total_mc={profile.total:.6g} n={args.n}")
    if args.dump_trajectory:
        dyn.export_trajectory(traj, args.dump_trajectory)
    return EXIT_OK


def _cmd_thresholds(args: argparse.Namespace) -> int:
    cfg = exp.load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    spec = exp.representative_spec(cfg)
    delta, d = exp.grid_parameters(cfg.activation)
    th = dyn.saturation_thresholds(spec, delta, d)
    proxy = "" if cfg.activation.kind == "pws" else " (proxy delta/d for a non-piecewise activation)"
    print(f"delta={delta:g} d={d:g}{proxy}")
    print(f"sigma_lower={th.sigma_lower:.17g}")
    print(f"sigma_upper={th.sigma_upper:.17g}")
    print(f"sigma_lower_loose={th.sigma_lower_loose:.17g}")
    print(f"sigma_upper_loose={th.sigma_upper_loose:.17g}")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    try:
        ensemble = parse_ensemble(args.ensemble)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    spec = sample_reservoir(args.n, ensemble, args.spectral_norm, args.seed)
    profile = cap.linear_mc_oracle(spec, tau_max=args.tau_max)
    print(cap.profile_record(profile, float("nan")))
    print(f"total_mc={profile.total:.6g} n={args.n}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "mc":
            return _cmd_mc(args)
        if args.command == "thresholds":
            return _cmd_thresholds(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"memcap: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemcapError as exc:
        print(f"memcap: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
