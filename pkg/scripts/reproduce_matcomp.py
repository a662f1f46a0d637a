#!/usr/bin/env python3
"""Semiconvergence for 20 x 20 rank-5 completion with a fifth of the entries observed."""

import argparse
from pathlib import Path

from iterreg.experiments import ExperimentSpec, run_matcomp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/matcomp")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--replicates", type=int, default=10)
    ap.add_argument("--delta", type=float, action="append", default=None)
    ap.add_argument("--max-iter", type=int, default=5000)
    args = ap.parse_args()

    spec = ExperimentSpec(name="matcomp", out_dir=Path(args.out), seed=args.seed,
                          max_iter=args.max_iter,
                          deltas=tuple(args.delta) if args.delta else (2.0, 4.0, 8.0),
                          replicates=args.replicates)
    summary = run_matcomp(spec)
    for delta, info in summary["per_delta"].items():
        print(f"delta={delta}: k* {info['k_star']}, interior {info['interior']}")


if __name__ == "__main__":
    main()
