"""Desk-scale experiment harness.

Every run executes the distributed pipeline on the simulated grid, checks
it against the sequential path, and writes one CSV with the per-rank
communication/compute rows followed by a single ``summary`` row.  Exit
status is 0 when the cross-check passes and 1 otherwise.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import ConfigurationError
from .formats import CscMatrix, as_csc, transpose_csc
from .generators import (
    RmatParams, erdos_renyi, make_rng, random_permutation, random_symmetric_permutation,
    restriction_operator, rmat,
)
from .grid import CSV_COLUMNS, CommStats, GridConfig, distribute, gather
from .indexing import dist_spasgn, dist_spref, read_index_vector, spasgn, spref
from .kernels import count_flops, hypersparse_gemm
from .mmio import read_matrix_market, write_matrix_market
from .semiring import PLUS_TIMES
from .summa import SummaPlan, predict_costs, sparse_summa

KINDS = ("spgemm", "spref-permute", "spref-subgraphs", "spasgn", "restriction", "tall-skinny")

SUMMARY_COLUMNS = [
    "kind", "scale", "grid", "blocking", "seed", "order", "mode", "latency", "eval_order",
    "requested_nnz_a", "nnz_a", "nnz_b", "nnz_c", "multiplies", "adds", "flops_oracle",
    "predicted_words_per_rank", "measured_words_per_rank_mean", "measured_words_per_rank_max",
    "check", "detail", "seconds",
]
COLUMNS = CSV_COLUMNS + [c for c in SUMMARY_COLUMNS if c not in CSV_COLUMNS]


@dataclass
class ExperimentSpec:
    kind: str
    scale: int = 10
    grid: str = "2x2"
    blocking: Optional[int] = None     # None: largest legal blocking
    seed: int = 0
    order: int = 2                     # restriction order
    out: Optional[str] = None
    mode: str = "seq"
    eval_order: str = "lr"
    latency: str = "flat"
    nnz_per_col: int = 8
    chunks: int = 10                   # spref-subgraphs
    fraction: float = 0.5              # spasgn: len(I) / n
    aspect: int = 256                  # tall-skinny: n / k
    matrix: Optional[str] = None       # Matrix Market file replacing the generated A
    rows_file: Optional[str] = None
    cols_file: Optional[str] = None
    save_inputs: Optional[str] = None

    @property
    def grid_config(self) -> GridConfig:
        return GridConfig.parse(self.grid)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        g = self.grid_config
        for name in ("matrix", "rows_file", "cols_file"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigurationError(f"{name} {path!r} does not exist")
        if self.kind in ("spref-permute", "spref-subgraphs", "spasgn") and not g.square:
            raise ConfigurationError(f"{self.kind} needs a square grid, got {g}")
        if self.kind == "spasgn":
            side = round((1 << self.scale) * self.fraction)
            if side < 1 or side & (side - 1):
                raise ConfigurationError("fraction must give a power-of-two block side")
        if self.mode not in ("seq", "conc"):
            raise ConfigurationError(f"mode must be seq or conc, got {self.mode!r}")
        if self.eval_order not in ("lr", "rl"):
            raise ConfigurationError(f"eval order must be lr or rl, got {self.eval_order!r}")


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    stats: CommStats
    summary: dict
    ok: bool
    diffs: List[str] = field(default_factory=list)

    def rows(self):
        out = [dict(r) for r in self.stats.rows()]
        out.append({"phase": "summary", **self.summary})
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=COLUMNS, restval="")
            w.writeheader()
            w.writerows(self.rows())


def diff_summary(name: str, got: CscMatrix, want: CscMatrix) -> Optional[str]:
    if got == want:
        return None
    if got.shape != want.shape:
        return f"{name}: shape {got.shape} != {want.shape}"
    g = {(i, j): v for i, j, v in zip(*got.coo())}
    w = {(i, j): v for i, j, v in zip(*want.coo())}
    missing = len(w.keys() - g.keys())
    extra = len(g.keys() - w.keys())
    changed = sum(1 for k in g.keys() & w.keys() if g[k] != w[k])
    return (f"{name}: nnz {got.nnz} vs {want.nnz}; {missing} missing, {extra} extra, "
            f"{changed} values differ")


def _blocking_for(g: GridConfig, k: int, blk):
    return SummaPlan.build(g, k, blk).blk


def _rmat(spec, scale, seed):
    return rmat(RmatParams(scale, spec.nnz_per_col, seed=seed))


def _input_a(spec) -> CscMatrix:
    if spec.matrix:
        return read_matrix_market(spec.matrix, PLUS_TIMES)
    return _rmat(spec, spec.scale, spec.seed)


def _volume(stats, phase):
    vol = stats.broadcast_volume(phase)
    vals = np.array(list(vol.values()), dtype=float)
    return float(vals.mean()), int(vals.max())


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    spec.validate()
    g = spec.grid_config
    sr = PLUS_TIMES
    run = dict(mode=spec.mode, latency=spec.latency)
    diffs: List[str] = []
    s = dict(kind=spec.kind, scale=spec.scale, grid=str(g), seed=spec.seed, order=spec.order,
             mode=spec.mode, latency=spec.latency, eval_order=spec.eval_order)
    a = _input_a(spec)
    s["requested_nnz_a"] = "" if spec.matrix else spec.nnz_per_col * a.cols
    s["nnz_a"] = a.nnz
    stats = CommStats(g)
    saved = {"A": a}
    t0 = time.perf_counter()

    if spec.kind in ("spgemm", "tall-skinny"):
        if spec.kind == "spgemm":
            b = _rmat(spec, spec.scale, spec.seed + 1) if not spec.matrix else a
            a, r = random_symmetric_permutation(a, spec.seed, sr)
            b = spref(b, r, r, sr)
        else:
            k = max(a.cols // spec.aspect, 1)
            b = erdos_renyi(a.cols, k, min(spec.nnz_per_col, a.cols), spec.seed + 1, sr)
        saved["B"] = b
        blk = _blocking_for(g, a.cols, spec.blocking)
        t0 = time.perf_counter()
        dc, st = sparse_summa(distribute(a, g), distribute(b, g), blk, sr, phase="summa", **run)
        stats.merge(st)
        c = gather(dc)
        seconds = time.perf_counter() - t0
        want, _ = hypersparse_gemm(a, b, sr)
        d = diff_summary("C", c, as_csc(want))
        diffs += [d] if d else []
        flops = count_flops(a, b)
        if stats.multiplies() != flops:
            diffs.append(f"multiplies {stats.multiplies()} != count_flops {flops}")
        s.update(blocking=blk, nnz_b=b.nnz, nnz_c=c.nnz, flops_oracle=flops)
        mean, mx = _volume(stats, "summa")
        s.update(measured_words_per_rank_mean=mean, measured_words_per_rank_max=mx)
        p = g.p
        if g.square:
            model = predict_costs(a.nnz, b.nnz, a.cols, a.nnz / max(a.cols, 1), p, blk,
                                  latency=spec.latency)
            s["predicted_words_per_rank"] = model.bcast_words_per_rank

    elif spec.kind in ("spref-permute", "spref-subgraphs"):
        n = a.rows
        if spec.kind == "spref-permute":
            i_vec = read_index_vector(spec.rows_file) if spec.rows_file else random_permutation(n, spec.seed)
            j_vec = read_index_vector(spec.cols_file) if spec.cols_file else i_vec
            pieces = [(i_vec, j_vec)]
        else:
            perm = random_permutation(n, spec.seed)
            pieces = [(c, c) for c in np.array_split(perm, spec.chunks)]
        da = distribute(a, g)
        t0 = time.perf_counter()
        total_nnz = 0
        got = []
        for t, (iv, jv) in enumerate(pieces):
            out, st = dist_spref(da, iv, jv, sr, eval_order=spec.eval_order, blk=spec.blocking,
                                 **run)
            stats.merge(st)
            got.append(gather(out))
        seconds = time.perf_counter() - t0
        for t, ((iv, jv), c) in enumerate(zip(pieces, got)):
            d = diff_summary(f"block {t}", c, spref(a, iv, jv, sr))
            diffs += [d] if d else []
            total_nnz += c.nnz
        if spec.kind == "spref-subgraphs" and total_nnz > a.nnz:
            diffs.append(f"extracted {total_nnz} entries from a matrix with {a.nnz}")
        s.update(nnz_c=total_nnz, blocking=spec.blocking or "max")

    elif spec.kind == "spasgn":
        n = a.rows
        side = round(n * spec.fraction)
        b = _rmat(spec, int(math.log2(side)), spec.seed + 1)
        saved["B"] = b
        rng = make_rng(spec.seed + 2)
        i_vec = read_index_vector(spec.rows_file) if spec.rows_file else rng.permutation(n)[:side]
        j_vec = read_index_vector(spec.cols_file) if spec.cols_file else rng.permutation(n)[:side]
        t0 = time.perf_counter()
        out, st = dist_spasgn(distribute(a, g), i_vec, j_vec, distribute(b, g), sr,
                              blk=spec.blocking, **run)
        stats.merge(st)
        c = gather(out)
        seconds = time.perf_counter() - t0
        want = spasgn(a, i_vec, j_vec, b, sr)
        d = diff_summary("C", c, want)
        diffs += [d] if d else []
        # frame rule: entries outside rows I x cols J are untouched
        region = np.zeros((n, n), dtype=bool)
        region[np.ix_(i_vec, j_vec)] = True
        ar, ac, av = a.coo()
        cr, cc, cv = c.coo()
        keep_a = ~region[ar, ac]
        keep_c = ~region[cr, cc]
        if not (np.array_equal(ar[keep_a], cr[keep_c]) and np.array_equal(ac[keep_a], cc[keep_c])
                and np.array_equal(av[keep_a], cv[keep_c])):
            diffs.append("entries outside the assigned region changed")
        s.update(nnz_b=b.nnz, nnz_c=c.nnz, blocking=spec.blocking or "max")

    elif spec.kind == "restriction":
        n = a.rows
        a, _ = random_symmetric_permutation(a, spec.seed, sr)
        rs = restriction_operator(n, spec.order, spec.seed + 1, sr)
        rst = transpose_csc(rs)
        saved["S"] = rs
        ds, da, dst = distribute(rs, g), distribute(a, g), distribute(rst, g)
        t0 = time.perf_counter()
        if spec.eval_order == "lr":
            left, s1 = sparse_summa(ds, da, spec.blocking, sr, phase="summa_SA", **run)
            out, s2 = sparse_summa(left, dst, spec.blocking, sr, phase="summa_SAS", **run)
        else:
            right, s1 = sparse_summa(da, dst, spec.blocking, sr, phase="summa_AS", **run)
            out, s2 = sparse_summa(ds, right, spec.blocking, sr, phase="summa_SAS", **run)
        stats.merge(s1).merge(s2)
        c = gather(out)
        seconds = time.perf_counter() - t0
        # the oracle associates the same way, so the comparison stays bitwise
        if spec.eval_order == "lr":
            want, _ = hypersparse_gemm(hypersparse_gemm(rs, a, sr)[0], rst, sr)
        else:
            want, _ = hypersparse_gemm(rs, hypersparse_gemm(a, rst, sr)[0], sr)
        d = diff_summary("C", c, as_csc(want))
        diffs += [d] if d else []
        s.update(nnz_b=rs.nnz, nnz_c=c.nnz, blocking=spec.blocking or "max")

    s.update(multiplies=stats.multiplies(), adds=stats.adds())
    ok = not diffs
    s["check"] = "pass" if ok else "fail"
    s["detail"] = "; ".join(diffs)
    # timings are only reported for correct results
    s["seconds"] = round(seconds, 6) if ok else ""
    if spec.save_inputs:
        out_dir = Path(spec.save_inputs)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, m in saved.items():
            write_matrix_market(m, out_dir / f"{spec.kind}_{name}.mtx", sr)
    res = ExperimentResult(spec, stats, s, ok, diffs)
    if spec.out:
        res.write_csv(spec.out)
    return res


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--scale", type=int, default=10)
    p.add_argument("--grid", default="2x2", help="processor grid PRxPC")
    p.add_argument("--blocking", default="max",
                   help="SUMMA blocking b, or 'max' for the largest legal value")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", type=int, default=2, help="restriction order")
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--mode", choices=("seq", "conc"), default="seq")
    p.add_argument("--eval-order", choices=("lr", "rl"), default="lr")
    p.add_argument("--latency", choices=("flat", "tree"), default="flat")
    p.add_argument("--nnz-per-col", type=int, default=8)
    p.add_argument("--chunks", type=int, default=10)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--aspect", type=int, default=256)
    p.add_argument("--matrix", default=None, help="Matrix Market file used as A")
    p.add_argument("--rows", dest="rows_file", default=None, help="row index file (0-based)")
    p.add_argument("--cols", dest="cols_file", default=None, help="column index file (0-based)")
    p.add_argument("--save-inputs", default=None, help="directory for Matrix Market inputs")
    return p


def spec_from_args(ns) -> ExperimentSpec:
    blk = None if str(ns.blocking).lower() == "max" else int(ns.blocking)
    return ExperimentSpec(kind=ns.kind, scale=ns.scale, grid=ns.grid, blocking=blk, seed=ns.seed,
                          order=ns.order, out=ns.out, mode=ns.mode, eval_order=ns.eval_order,
                          latency=ns.latency, nnz_per_col=ns.nnz_per_col, chunks=ns.chunks,
                          fraction=ns.fraction, aspect=ns.aspect, matrix=ns.matrix,
                          rows_file=ns.rows_file, cols_file=ns.cols_file,
                          save_inputs=ns.save_inputs)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(ns)
        res = run_experiment(spec)
    except (ConfigurationError, ValueError) as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 1
    s = res.summary
    print(f"{spec.kind} grid={s['grid']} b={s.get('blocking')} nnz(A)={s.get('nnz_a')} "
          f"nnz(B)={s.get('nnz_b', '')} nnz(C)={s.get('nnz_c')} "
          f"multiplies={s['multiplies']} adds={s['adds']} check={s['check']}")
    for d in res.diffs:
        print(f"  {d}", file=sys.stderr)
    return 0 if res.ok else 1


if __name__ == "__main__":
    sys.exit(main())
