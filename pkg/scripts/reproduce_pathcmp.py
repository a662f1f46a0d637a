#!/usr/bin/env python3
"""Held-out comparison: explicit-penalty path versus early-stopped iteration path."""

import argparse
import json
from pathlib import Path

from iterreg.experiments import ExperimentSpec, run_pathcmp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/pathcmp")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise", type=float, default=4.0)
    ap.add_argument("--folds", type=int, default=4)
    args = ap.parse_args()

    spec = ExperimentSpec(name="pathcmp", out_dir=Path(args.out), seed=args.seed,
                          problem={"delta": args.noise, "folds": args.folds})
    print(json.dumps(run_pathcmp(spec), indent=2))


if __name__ == "__main__":
    main()
