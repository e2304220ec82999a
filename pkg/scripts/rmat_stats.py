"""Degree statistics and quadrant frequencies of the R-MAT generator."""
import argparse
import time

import numpy as np

from spsumma.generators import RmatParams, quadrant_frequencies, rmat


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--scales", type=int, nargs="+", default=[10, 12, 14])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10**6)
    args = p.parse_args(argv)

    print(f"{'scale':>5} {'policy':>8} {'nnz/col':>8} {'max deg':>8} {'empty cols':>10} {'sec':>6}")
    for scale in args.scales:
        for policy in ("refill", "collapse"):
            t0 = time.perf_counter()
            a = rmat(RmatParams(scale, seed=args.seed, duplicates=policy))
            deg = np.diff(a.cp)
            print(f"{scale:>5} {policy:>8} {a.nnz / a.cols:>8.3f} {deg.max():>8} "
                  f"{int((deg == 0).sum()):>10} {time.perf_counter() - t0:>6.2f}")
    freqs = quadrant_frequencies(RmatParams(1, seed=args.seed), args.samples)
    print("quadrant frequencies a b c d:", " ".join(f"{f:.4f}" for f in freqs))


if __name__ == "__main__":
    main()
