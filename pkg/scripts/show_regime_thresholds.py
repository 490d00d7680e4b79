#!/usr/bin/env python3
"""Print regime thresholds and the analytic linear capacity profile for one draw.

Handy when choosing explicit sigma bounds for a sweep config.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from memcap import linear_mc_oracle, parse_ensemble, sample_reservoir, saturation_thresholds


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=30)
    parser.add_argument("--ensemble", default="dense")
    parser.add_argument("--spectral-norm", type=float, default=0.95)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--delta", type=float, default=0.5)
    parser.add_argument("--d", type=float, default=2.0)
    parser.add_argument("--tau-max", type=int, default=None)
    args = parser.parse_args()

    spec = sample_reservoir(args.n, parse_ensemble(args.ensemble), args.spectral_norm, args.seed)
    th = saturation_thresholds(spec, args.delta, args.d)
    print(f"n={args.n} ensemble={args.ensemble} seed={args.seed}")
    print(f"mask floor={spec.mask_floor:.6g} mask ceil={spec.mask_ceil:.6g}")
    print(f"sigma_lower={th.sigma_lower:.6g} sigma_upper={th.sigma_upper:.6g}")
    print(f"sigma_lower_loose={th.sigma_lower_loose:.6g} sigma_upper_loose={th.sigma_upper_loose:.6g}")
    oracle = linear_mc_oracle(spec, tau_max=args.tau_max)
    print(f"linear oracle total={oracle.total:.4f} over {len(oracle.per_lag)} lags")
    with np.printoptions(precision=4, suppress=True):
        print(f"first lags: {oracle.per_lag[:10]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
