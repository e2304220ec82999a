"""Submatrix extraction and assignment as sparse triple products.

Sequential forms work on CSC/DCSC operands.  The ``dist_*`` forms run on a
square simulated grid: boolean extractors are built from index vectors held
on the diagonal ranks (or spread over all ranks) and multiplied with Sparse
SUMMA.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BoundsError, ConfigurationError, DimensionError
from .formats import (
    INDEX, CscMatrix, as_csc, as_dcsc, csc_from_coo, dcsc_from_unique,
)
from .grid import (
    CommStats, DistMatrix, DistVector, GridConfig, block_bounds, block_owner,
    blockwise, run_spmd, transpose_exchange,
)
from .kernels import count_flops, ewise_mult, hypersparse_gemm, sparse_add
from .semiring import Semiring
from .summa import sparse_summa


def as_index_vector(v, bound: int, *, unique: bool = False, name: str = "index") -> np.ndarray:
    arr = np.asarray(v, dtype=INDEX).reshape(-1)
    if len(arr) and (arr.min() < 0 or arr.max() >= bound):
        bad = arr[(arr < 0) | (arr >= bound)][0]
        raise BoundsError(f"{name} vector entry {bad} outside 0..{bound - 1}")
    if unique and len(np.unique(arr)) != len(arr):
        vals, counts = np.unique(arr, return_counts=True)
        raise ValueError(f"{name} vector has duplicate entry {vals[counts > 1][0]}")
    return arr


def read_index_vector(path) -> np.ndarray:
    """Whitespace-separated 0-based indices."""
    with open(path) as fh:
        text = fh.read().split()
    return np.array([int(t) for t in text], dtype=INDEX)


def build_row_extractor(i_vec, m: int, sr: Semiring) -> CscMatrix:
    """R (len(I) x m) with R(r, I(r)) = one."""
    idx = as_index_vector(i_vec, m, name="row")
    pos = np.arange(len(idx), dtype=INDEX)
    return csc_from_coo(pos, idx, np.full(len(idx), sr.one, dtype=sr.dtype), len(idx), m, sr)


def build_col_extractor(j_vec, n: int, sr: Semiring) -> CscMatrix:
    """Q (n x len(J)) with Q(J(c), c) = one."""
    idx = as_index_vector(j_vec, n, name="column")
    pos = np.arange(len(idx), dtype=INDEX)
    return csc_from_coo(idx, pos, np.full(len(idx), sr.one, dtype=sr.dtype), n, len(idx), sr)


def build_diagonal_selector(i_vec, m: int, sr: Semiring) -> CscMatrix:
    """S (m x m) with ones at (I(r), I(r))."""
    idx = as_index_vector(i_vec, m, unique=True, name="row")
    return csc_from_coo(idx, idx, np.full(len(idx), sr.one, dtype=sr.dtype), m, m, sr)


@dataclass
class SpRefReport:
    flops_first: int
    flops_second: int
    nnz_a: int
    eval_order: str

    @property
    def total_flops(self) -> int:
        return self.flops_first + self.flops_second


def spref(a, i_vec, j_vec, sr: Semiring, *, eval_order: str = "lr",
          report: Optional[list] = None) -> CscMatrix:
    """B = A(I, J) computed as R @ A @ Q.

    Duplicated indices replicate rows/columns.  ``eval_order`` picks
    (R A) Q (``"lr"``) or R (A Q) (``"rl"``); the per-product multiply counts
    are appended to ``report`` when given.
    """
    a = as_dcsc(a)
    m, n = a.shape
    r = build_row_extractor(i_vec, m, sr)
    q = build_col_extractor(j_vec, n, sr)
    if eval_order == "lr":
        ra, f1 = hypersparse_gemm(r, a, sr)
        b, f2 = hypersparse_gemm(ra, q, sr)
    elif eval_order == "rl":
        aq, f1 = hypersparse_gemm(a, q, sr)
        b, f2 = hypersparse_gemm(r, aq, sr)
    else:
        raise ValueError(f"eval_order must be 'lr' or 'rl', got {eval_order!r}")
    if report is not None:
        report.append(SpRefReport(f1.multiplies, f2.multiplies, a.nnz, eval_order))
    return as_csc(b)


def _asgn_operands(a, i_vec, j_vec, b, sr):
    a, b = as_dcsc(a), as_dcsc(b)
    m, n = a.shape
    idx_i = as_index_vector(i_vec, m, unique=True, name="row")
    idx_j = as_index_vector(j_vec, n, unique=True, name="column")
    if b.shape != (len(idx_i), len(idx_j)):
        raise DimensionError(
            f"B is {b.shape} but len(I) x len(J) is {(len(idx_i), len(idx_j))}")
    r = build_col_extractor(idx_i, m, sr)   # m x len(I), R(I(r), r) = one
    q = build_row_extractor(idx_j, n, sr)   # len(J) x n, Q(c, J(c)) = one
    return a, b, idx_i, idx_j, as_dcsc(r), as_dcsc(q)


@dataclass
class SpAsgnReport:
    flops_rb: int
    flops_rbq: int
    flops_sa: int
    flops_sat: int
    sa_selected_rows: int      # diagonal entries of S meeting a nonempty row of A
    nnz_sa: int
    nnz_sat: int
    nnz_a: int
    nnz_b: int
    len_i: int
    len_j: int

    @property
    def total_flops(self) -> int:
        return self.flops_rb + self.flops_rbq + self.flops_sa + self.flops_sat

    @property
    def envelope(self) -> int:
        return 2 * (self.nnz_a + self.nnz_b + self.len_i + self.len_j)


def _spasgn(a, i_vec, j_vec, b, sr, replace: bool):
    a, b, idx_i, idx_j, r, q = _asgn_operands(a, i_vec, j_vec, b, sr)
    m, n = a.shape
    rb, f_rb = hypersparse_gemm(r, b, sr)
    rbq, f_rbq = hypersparse_gemm(rb, q, sr)
    if not replace:
        out = sparse_add(a, rbq, sr)
        rep = SpAsgnReport(f_rb.multiplies, f_rbq.multiplies, 0, 0, 0, 0, 0,
                           a.nnz, b.nnz, len(idx_i), len(idx_j))
        return out, rep
    s = build_diagonal_selector(idx_i, m, sr)
    t = build_diagonal_selector(idx_j, n, sr)
    sa, f_sa = hypersparse_gemm(s, a, sr)
    sat, f_sat = hypersparse_gemm(sa, t, sr)
    masked = ewise_mult(a, sat, True, sr)
    out = sparse_add(masked, rbq, sr)
    row_has = np.isin(idx_i, np.unique(a.ir))
    rep = SpAsgnReport(f_rb.multiplies, f_rbq.multiplies, f_sa.multiplies, f_sat.multiplies,
                       int(row_has.sum()), sa.nnz, sat.nnz, a.nnz, b.nnz,
                       len(idx_i), len(idx_j))
    return out, rep


def spasgn(a, i_vec, j_vec, b, sr: Semiring) -> CscMatrix:
    """A(I, J) = B without additive inverses: the (I, J) region of A is
    removed by masking with the complement of S A T, then R B Q is added."""
    return as_csc(_spasgn(a, i_vec, j_vec, b, sr, True)[0])


def spasgn_op_counters(a, i_vec, j_vec, b, sr: Semiring) -> SpAsgnReport:
    return _spasgn(a, i_vec, j_vec, b, sr, True)[1]


def extend_add(a, i_vec, j_vec, b, sr: Semiring) -> CscMatrix:
    """A(I, J) += B, i.e. A + R B Q."""
    return as_csc(_spasgn(a, i_vec, j_vec, b, sr, False)[0])


def flops_spref_bound(a, i_vec, j_vec, sr: Semiring) -> int:
    """Multiplies of (R A) Q predicted by count_flops, without running it."""
    a = as_dcsc(a)
    r = build_row_extractor(i_vec, a.rows, sr)
    q = build_col_extractor(j_vec, a.cols, sr)
    ra, _ = hypersparse_gemm(r, a, sr)
    return count_flops(r, a) + count_flops(ra, q)


# -- distributed -------------------------------------------------------------

def _dist_selector(g: GridConfig, vec: np.ndarray, ncols: int, sr: Semiring, *,
                   diagonal: bool, vector_mode: str, mode: str, latency: str, phase: str):
    """Distributed boolean matrix from an index vector.

    ``diagonal=False`` builds the extractor E (len(vec) x ncols) with
    E(r, vec[r]) = one; ``diagonal=True`` builds the selector
    S (ncols x ncols) with S(vec[r], vec[r]) = one.

    With a diagonal-mode vector, P(t, t) holds the positions of row block t
    of E, so E is formed by one scatter along each processor row.  Block
    mode vectors and the diagonal selector route entries with an all-to-all.
    """
    length = len(vec)
    nrows = ncols if diagonal else length
    pairs = np.stack([np.arange(length, dtype=INDEX), vec.astype(INDEX)], axis=1)
    v = DistVector.from_array(pairs, g, vector_mode)
    blank = pairs[:0]

    def coords(items):
        if diagonal:
            return items[:, 1], items[:, 1]
        return items[:, 0], items[:, 1]

    def dest_rank(items):
        r, c = coords(items)
        return block_owner(r, nrows, g.pr) * g.pc + block_owner(c, ncols, g.pc)

    def program(ctx):
        items = ctx.local.get("items", blank)
        if vector_mode == "diagonal" and not diagonal:
            mine = yield from ctx.scatter_from_diagonal(
                items, dest=lambda it: block_owner(it[:, 1], ncols, g.pc), axis="row")
        else:
            mine = yield from ctx.alltoall(items, dest_rank)
        r0 = block_bounds(nrows, g.pr, ctx.i)
        c0 = block_bounds(ncols, g.pc, ctx.j)
        r, c = coords(mine)
        vals = np.full(len(mine), sr.one, dtype=sr.dtype)
        return dcsc_from_unique(r - r0[0], c - c0[0], vals, r0[1] - r0[0], c0[1] - c0[0])

    local = {rk: {"items": p} for rk, p in v.pieces.items()}
    res, stats = run_spmd(g, program, mode=mode, latency=latency, local=local, phase=phase)
    return DistMatrix(g, nrows, ncols, res), stats


def _require_square(g: GridConfig):
    if not g.square:
        raise ConfigurationError("distributed indexing needs a square grid")


def dist_row_extractor(g, i_vec, m, sr, *, vector_mode="diagonal", mode="seq",
                       latency="flat", stats: Optional[CommStats] = None,
                       phase="form_R") -> DistMatrix:
    """Distributed R (len(I) x m) with R(r, I(r)) = one."""
    _require_square(g)
    idx = as_index_vector(i_vec, m, name="row")
    r, st = _dist_selector(g, idx, m, sr, diagonal=False, vector_mode=vector_mode,
                           mode=mode, latency=latency, phase=phase)
    if stats is not None:
        stats.merge(st)
    return r


def dist_col_extractor(g, j_vec, n, sr, *, vector_mode="diagonal", mode="seq",
                       latency="flat", stats: Optional[CommStats] = None,
                       phase="form_Q") -> DistMatrix:
    """Distributed Q (n x len(J)): Q^T is formed like a row extractor and
    then transposed across the grid."""
    qt = dist_row_extractor(g, j_vec, n, sr, vector_mode=vector_mode, mode=mode,
                            latency=latency, stats=stats, phase=phase + "t")
    q, st = transpose_exchange(qt, mode=mode, latency=latency, phase="transpose_" + phase)
    if stats is not None:
        stats.merge(st)
    return q


def dist_spref(a: DistMatrix, i_vec, j_vec, sr: Semiring, *, eval_order="lr",
               vector_mode="diagonal", blk=None, mode="seq", latency="flat"):
    """Distributed A(I, J); returns (DistMatrix, CommStats)."""
    g = a.grid
    _require_square(g)
    m, n = a.shape
    stats = CommStats(g)
    kw = dict(vector_mode=vector_mode, mode=mode, latency=latency, stats=stats)
    r = dist_row_extractor(g, i_vec, m, sr, **kw)
    q = dist_col_extractor(g, j_vec, n, sr, **kw)
    run = dict(mode=mode, latency=latency)
    if eval_order == "lr":
        ra, s1 = sparse_summa(r, a, blk, sr, phase="summa_RA", **run)
        out, s2 = sparse_summa(ra, q, blk, sr, phase="summa_RAQ", **run)
    elif eval_order == "rl":
        aq, s1 = sparse_summa(a, q, blk, sr, phase="summa_AQ", **run)
        out, s2 = sparse_summa(r, aq, blk, sr, phase="summa_RAQ", **run)
    else:
        raise ValueError(f"eval_order must be 'lr' or 'rl', got {eval_order!r}")
    stats.merge(s1).merge(s2)
    return out, stats


def _dist_asgn(a: DistMatrix, i_vec, j_vec, b: DistMatrix, sr, replace, *, vector_mode,
               blk, mode, latency):
    g = a.grid
    _require_square(g)
    if b.grid != g:
        raise ConfigurationError("A and B must share a grid")
    m, n = a.shape
    idx_i = as_index_vector(i_vec, m, unique=True, name="row")
    idx_j = as_index_vector(j_vec, n, unique=True, name="column")
    if b.shape != (len(idx_i), len(idx_j)):
        raise DimensionError(
            f"B is {b.shape} but len(I) x len(J) is {(len(idx_i), len(idx_j))}")
    stats = CommStats(g)
    run = dict(mode=mode, latency=latency)
    kw = dict(vector_mode=vector_mode, stats=stats, **run)
    # here R is m x len(I) and Q is len(J) x n
    r = dist_col_extractor(g, idx_i, m, sr, phase="form_R", **kw)
    q = dist_row_extractor(g, idx_j, n, sr, phase="form_Q", **kw)
    rb, s1 = sparse_summa(r, b, blk, sr, phase="summa_RB", **run)
    rbq, s2 = sparse_summa(rb, q, blk, sr, phase="summa_RBQ", **run)
    stats.merge(s1).merge(s2)
    if not replace:
        return blockwise(lambda x, y: sparse_add(x, y, sr), a, rbq), stats
    s, st_s = _dist_selector(g, idx_i, m, sr, diagonal=True, vector_mode=vector_mode,
                             phase="form_S", **run)
    t, st_t = _dist_selector(g, idx_j, n, sr, diagonal=True, vector_mode=vector_mode,
                             phase="form_T", **run)
    sa, s3 = sparse_summa(s, a, blk, sr, phase="summa_SA", **run)
    sat, s4 = sparse_summa(sa, t, blk, sr, phase="summa_SAT", **run)
    stats.merge(st_s).merge(st_t).merge(s3).merge(s4)
    masked = blockwise(lambda x, y: ewise_mult(x, y, True, sr), a, sat)
    return blockwise(lambda x, y: sparse_add(x, y, sr), masked, rbq), stats


def dist_spasgn(a: DistMatrix, i_vec, j_vec, b: DistMatrix, sr: Semiring, *,
                vector_mode="diagonal", blk=None, mode="seq", latency="flat"):
    """Distributed A(I, J) = B; returns (DistMatrix, CommStats)."""
    return _dist_asgn(a, i_vec, j_vec, b, sr, True, vector_mode=vector_mode, blk=blk,
                      mode=mode, latency=latency)


def dist_extend_add(a: DistMatrix, i_vec, j_vec, b: DistMatrix, sr: Semiring, *,
                    vector_mode="diagonal", blk=None, mode="seq", latency="flat"):
    """Distributed A(I, J) += B; returns (DistMatrix, CommStats)."""
    return _dist_asgn(a, i_vec, j_vec, b, sr, False, vector_mode=vector_mode, blk=blk,
                      mode=mode, latency=latency)
