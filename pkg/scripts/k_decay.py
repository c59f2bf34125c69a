"""Graph operator k_r of the Cauchy data near r = 0: ‖k_r − k_0‖ and its ratio to |r| (expected O(|r|))."""
import argparse
import sys

import numpy as np

from splitflow import adiabatic as ad
from splitflow.dirac1d import cauchy_data
from splitflow.hsymp import spectral_split
from splitflow.scenarios import corollary_path


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--t", type=float, default=0.0)
    ap.add_argument("--depth", type=int, default=20)
    args = ap.parse_args()
    D = corollary_path(args.seed, "invertible")(args.t)
    split = spectral_split(D.boundary_space().space, D.S_sigma, 0.0)
    L = cauchy_data(D, "X")
    k = lambda r: ad.k_matrix(ad.graph_operator_k(L, split, r), split)
    k0 = k(0.0)
    print("r,dist,ratio")
    for j in range(1, args.depth + 1):
        for r in (2.0 ** -j, -(2.0 ** -j)):
            d = float(np.linalg.norm(k(r) - k0, 2))
            print(f"{r:.17g},{d:.17g},{d / abs(r):.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
