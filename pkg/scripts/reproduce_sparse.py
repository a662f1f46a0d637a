#!/usr/bin/env python3
"""Sparse-recovery experiments on the (n, p) = (200, 500) correlated design.

Runs the semiconvergence curves, the stopping-time sweep, and the bound
checks with the full protocol (pass --quick for a desk-scale smoke run).
"""

import argparse
from pathlib import Path

from iterreg.experiments import ExperimentSpec, run_bounds, run_semiconv, run_stoptime

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/sparse")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--replicates", type=int, default=None,
                    help="default: 10 for curves, 100 for the stopping-time sweep")
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)

    curve_reps = args.replicates or (2 if args.quick else 10)
    sweep_reps = args.replicates or (5 if args.quick else 100)
    iters = 800 if args.quick else 5000

    spec = ExperimentSpec(name="semiconv", out_dir=out / "semiconv", seed=args.seed,
                          max_iter=iters, deltas=(0.6, 1.2, 2.4), replicates=curve_reps)
    print("semiconv:", run_semiconv(spec)["per_delta"])

    spec = ExperimentSpec(name="stoptime", out_dir=out / "stoptime", seed=args.seed,
                          max_iter=iters, deltas=tuple(np.linspace(0.1, 6.0, 20)),
                          replicates=sweep_reps)
    print("stoptime fit:", run_stoptime(spec)["fit"])

    spec = ExperimentSpec(name="bounds", out_dir=out / "bounds", seed=args.seed,
                          max_iter=iters, deltas=(0.0, 0.1, 1.0, 3.0),
                          replicates=2 if args.quick else 5)
    print("bounds:", run_bounds(spec))


if __name__ == "__main__":
    main()
