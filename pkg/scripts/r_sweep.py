"""Stretch a corollary path by r and tabulate the identity, the endpoint intersections and ‖k_r − k_0‖."""
import argparse
import sys

import numpy as np

from splitflow.cli import run_sweep


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kind", default="invertible", choices=["invertible", "kernel"])
    ap.add_argument("--verifier", default="bunke")
    ap.add_argument("--points", type=int, default=6)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    data = {"operator": {"corollary": {"kind": args.kind, "seed": args.seed}}, "verifier": args.verifier}
    grid = list(2.0 ** -np.arange(args.points))
    text, status = run_sweep(data, "r", grid, args.jobs)
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
