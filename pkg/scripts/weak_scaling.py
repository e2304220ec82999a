"""Fixed-memory weak scaling of the tall-skinny product.

n = 256 p, A is Erdos-Renyi n x n and B is n x (n / aspect), both with d
nonzeros per column.  Per-rank broadcast words should grow like sqrt(p).
"""
import argparse
import math

import numpy as np

from spsumma.generators import erdos_renyi
from spsumma.grid import GridConfig, distribute
from spsumma.semiring import PLUS_TIMES
from spsumma.summa import SummaPlan, measured_broadcast_words, predict_costs, sparse_summa


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--procs", type=int, nargs="+", default=[4, 16, 64])
    p.add_argument("--per-rank", type=int, default=256, help="rows of A per processor")
    p.add_argument("--aspect", type=int, default=128)
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    print(f"{'p':>4} {'n':>7} {'words/rank':>11} {'model':>9} {'ratio':>7} {'sqrt(p/p0)':>10}")
    base = None
    for procs in args.procs:
        side = math.isqrt(procs)
        if side * side != procs:
            raise SystemExit(f"p={procs} is not a perfect square")
        n = args.per_rank * procs
        g = GridConfig(side, side)
        a = erdos_renyi(n, n, args.degree, seed=args.seed + procs)
        b = erdos_renyi(n, n // args.aspect, args.degree, seed=args.seed + procs + 1)
        _, stats = sparse_summa(distribute(a, g), distribute(b, g), None, PLUS_TIMES)
        words = float(np.mean(list(measured_broadcast_words(stats).values())))
        model = predict_costs(a.nnz, b.nnz, n, args.degree, procs, SummaPlan.build(g, n).blk)
        if base is None and words > 0:   # a single rank broadcasts nothing
            base = (words, procs)
        ratio, fit = ((words / base[0], math.sqrt(procs / base[1])) if base
                      else (float("nan"), float("nan")))
        print(f"{procs:>4} {n:>7} {words:>11.0f} {model.bcast_words_per_rank:>9.0f} "
              f"{ratio:>7.3f} {fit:>10.3f}")


if __name__ == "__main__":
    main()
