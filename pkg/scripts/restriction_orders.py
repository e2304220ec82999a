"""Galerkin contraction S A S^T for several restriction orders.

Runs the distributed triple product in both parenthesizations through the
bench driver and reports communication and multiply counts.
"""
import argparse

from spsumma.bench import ExperimentSpec, run_experiment


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scale", type=int, default=10)
    p.add_argument("--grid", default="2x2")
    p.add_argument("--orders", type=int, nargs="+", default=[1, 2, 4, 8])
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    print(f"{'order':>5} {'eval':>4} {'nnz(C)':>8} {'multiplies':>11} {'words':>9} {'check':>6}")
    for order in args.orders:
        for ev in ("lr", "rl"):
            res = run_experiment(ExperimentSpec("restriction", scale=args.scale, grid=args.grid,
                                                order=order, eval_order=ev, seed=args.seed))
            s = res.summary
            print(f"{order:>5} {ev:>4} {s['nnz_c']:>8} {s['multiplies']:>11} "
                  f"{res.stats.totals().words:>9} {s['check']:>6}")


if __name__ == "__main__":
    main()
