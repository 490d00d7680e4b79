#!/usr/bin/env python3
"""Run the capacity-versus-input-scale sweeps and write CSVs plus bar plots.

One sweep per (activation, ensemble) pair: 12-point auto log grid between each
reservoir draw's own regime thresholds, reservoirs redrawn per cell, mean and
standard deviation of total memory capacity per grid position.

Example:
    python scripts/run_figure_sweeps.py --out-dir results --jobs 4
    python scripts/run_figure_sweeps.py --quick --activations tanh
"""

from __future__ import annotations

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from memcap import Ensemble, SigmaGrid, SweepConfig, emit_csv, emit_plot, parse_activation, run_sweep

ENSEMBLES = {
    "orthogonal": Ensemble.orthogonal(),
    "sparse": Ensemble.sparse_conditioned(0.1, 0.7),
    "dense": Ensemble.dense(),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=20250801)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--n", type=int, default=30)
    parser.add_argument("--length", type=int, default=100_000)
    parser.add_argument("--replications", type=int, default=10)
    parser.add_argument("--points", type=int, default=12)
    parser.add_argument(
        "--activations", default="tanh,relu,logsig",
        help="comma-separated activation tags (tanh, relu, logsig, pws:delta=..,d=..)",
    )
    parser.add_argument(
        "--ensembles", default="orthogonal,sparse,dense",
        help=f"comma-separated ensemble names from {sorted(ENSEMBLES)}",
    )
    parser.add_argument("--quick", action="store_true", help="small preset for a fast smoke run")
    args = parser.parse_args()

    if args.quick:
        args.n, args.length, args.replications, args.points = 10, 10_000, 3, 8

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for act_tag in args.activations.split(","):
        activation = parse_activation(act_tag.strip())
        for ens_name in args.ensembles.split(","):
            ensemble = ENSEMBLES[ens_name.strip()]
            cfg = SweepConfig(
                n=args.n,
                ensemble=ensemble,
                activation=activation,
                sigma_grid=SigmaGrid(count=args.points, bounds=None),
                trajectory_length=args.length,
                replications=args.replications,
                base_seed=args.seed,
            )
            t0 = time.perf_counter()
            result = run_sweep(cfg, jobs=args.jobs)
            elapsed = time.perf_counter() - t0
            stem = f"mc_{act_tag.strip().replace(':', '_').replace('=', '').replace(',', '_')}_{ens_name.strip()}"
            emit_csv(result, str(out_dir / f"{stem}.csv"))
            emit_plot(result, str(out_dir / f"{stem}.svg"))
            left, right = result.rows[0].mc_mean, result.rows[-1].mc_mean
            print(
                f"{act_tag.strip():8s} {ens_name.strip():10s} "
                f"left={left:7.2f} right={right:6.2f} "
                f"failed_cells={sum(r.n_failed for r in result.rows)} "
                f"elapsed={elapsed:6.1f}s -> {stem}.csv/.svg"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
