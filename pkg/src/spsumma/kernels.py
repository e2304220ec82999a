"""Sequential sparse kernels.

Two SpGEMM kernels give bit-identical results: every output entry is the
left fold, in ascending inner index k, of its products A(i,k)*B(k,j).  The
column-wise kernel gets that order from the sorted CSC columns of B; the
hypersparse kernel gets it from the heap tie-break on the outer-product
index.  Deferred merging of unmerged product streams keeps the same order,
which is what makes distributed results reproducible across grids.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np

from .errors import DimensionError
from .formats import (
    INDEX, CscMatrix, DcscMatrix, _dcsc_from_sorted, as_csc,
    as_dcsc, canonical_coo, transpose,
)
from .semiring import Semiring


@dataclass
class FlopCounter:
    multiplies: int = 0
    adds: int = 0
    peak_aux_words: int = 0

    def __iadd__(self, other: "FlopCounter"):
        self.multiplies += other.multiplies
        self.adds += other.adds
        self.peak_aux_words = max(self.peak_aux_words, other.peak_aux_words)
        return self


def _check_inner(a, b):
    if a.cols != b.rows:
        raise DimensionError(f"inner dimensions differ: {a.shape} x {b.shape}")


def _check_same(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shapes differ: {a.shape} vs {b.shape}")


class SpaAccumulator:
    """Dense-indexed scratch for one output column.

    Clearing after ``flush`` touches only occupied slots.
    """

    def __init__(self, rows: int):
        self.flags = bytearray(rows)
        self.values = [None] * rows
        self.occupied: List[int] = []

    def accumulate(self, i, v, add) -> bool:
        """Returns True when the slot was already occupied (an add happened)."""
        if self.flags[i]:
            self.values[i] = add(self.values[i], v)
            return True
        self.flags[i] = 1
        self.values[i] = v
        self.occupied.append(i)
        return False

    def flush(self, zero):
        self.occupied.sort()
        rows, vals = [], []
        for i in self.occupied:
            v = self.values[i]
            if v != zero:
                rows.append(i)
                vals.append(v)
            self.flags[i] = 0
            self.values[i] = None
        self.occupied = []
        return rows, vals


def columnwise_spgemm(a, b, sr: Semiring) -> Tuple[CscMatrix, FlopCounter]:
    """C(:,j) = sum_k A(:,k)*B(k,j) with a sparse accumulator (Gustavson)."""
    a, b = as_csc(a), as_csc(b)
    _check_inner(a, b)
    fc = FlopCounter()
    acp, air, anum = a.cp.tolist(), a.ir.tolist(), a.num.tolist()
    bcp, bir, bnum = b.cp.tolist(), b.ir.tolist(), b.num.tolist()
    mul, add, zero = sr.multiply, sr.add, sr.zero
    spa = SpaAccumulator(a.rows)
    out_r: list = []
    out_v: list = []
    counts = np.zeros(b.cols, dtype=INDEX)
    mults = adds = 0
    for j in range(b.cols):
        for t in range(bcp[j], bcp[j + 1]):
            k, bkj = bir[t], bnum[t]
            for s in range(acp[k], acp[k + 1]):
                mults += 1
                if spa.accumulate(air[s], mul(anum[s], bkj), add):
                    adds += 1
        rows, vals = spa.flush(zero)
        counts[j] = len(rows)
        out_r.extend(rows)
        out_v.extend(vals)
    fc.multiplies, fc.adds = mults, adds
    cp = np.zeros(b.cols + 1, dtype=INDEX)
    np.cumsum(counts, out=cp[1:])
    return CscMatrix(a.rows, b.cols, cp, np.array(out_r, dtype=INDEX),
                     np.array(out_v, dtype=sr.dtype)), fc


def outer_products(a: DcscMatrix, bt: DcscMatrix, sr: Semiring,
                   fc: FlopCounter) -> Iterator[Tuple[int, int, object]]:
    """Yield every product (j, i, A(i,k)*B(k,j)) ordered by (j, i, k).

    ``bt`` is B transposed, so its columns are the rows of B.  The ni active
    outer products are merged through a heap keyed on the output position,
    ties resolved by ascending k.
    """
    if a.cols != bt.cols:
        raise DimensionError(f"inner dimensions differ: {a.cols} vs {bt.cols}")
    ajc, acp, air, anum = a.jc.tolist(), a.cp.tolist(), a.ir.tolist(), a.num.tolist()
    bjc, bcp, bir, bnum = bt.jc.tolist(), bt.cp.tolist(), bt.ir.tolist(), bt.num.tolist()
    pairs = []
    x = y = 0
    while x < len(ajc) and y < len(bjc):
        if ajc[x] < bjc[y]:
            x += 1
        elif ajc[x] > bjc[y]:
            y += 1
        else:
            pairs.append((acp[x], acp[x + 1], bcp[y], bcp[y + 1]))
            x += 1
            y += 1
    heap = [(bir[b0], air[a0], t, a0, b0) for t, (a0, a1, b0, b1) in enumerate(pairs)]
    heapq.heapify(heap)
    fc.peak_aux_words = max(fc.peak_aux_words, 4 * len(pairs) + 5 * len(heap))
    mul = sr.multiply
    while heap:
        j, i, t, pa, pb = heap[0]
        fc.multiplies += 1
        yield j, i, mul(anum[pa], bnum[pb])
        a0, a1, b0, b1 = pairs[t]
        pa += 1
        if pa == a1:
            pa = a0
            pb += 1
            if pb == b1:
                heapq.heappop(heap)
                continue
        heapq.heapreplace(heap, (bir[pb], air[pa], t, pa, pb))


def _fold_stream(stream, add, fc: FlopCounter):
    """Fold consecutive products at equal (j, i); zeros are kept."""
    js, is_, vs = [], [], []
    last = None
    for j, i, v in stream:
        if (j, i) == last:
            vs[-1] = add(vs[-1], v)
            fc.adds += 1
        else:
            js.append(j)
            is_.append(i)
            vs.append(v)
            last = (j, i)
    return js, is_, vs


def _dcsc_from_folded(js, is_, vs, nrows, ncols, sr: Semiring) -> DcscMatrix:
    ci = np.array(js, dtype=INDEX)
    ri = np.array(is_, dtype=INDEX)
    vals = np.array(vs, dtype=sr.dtype)
    keep = ~sr.zero_mask(vals)
    if not keep.all():
        ci, ri, vals = ci[keep], ri[keep], vals[keep]
    return _dcsc_from_sorted(ri, ci, vals, nrows, ncols)


def hypersparse_gemm_bt(a: DcscMatrix, bt: DcscMatrix,
                        sr: Semiring) -> Tuple[DcscMatrix, FlopCounter]:
    """A @ B given A and B transposed, both DCSC; no dimension-sized arrays."""
    fc = FlopCounter()
    js, is_, vs = _fold_stream(outer_products(a, bt, sr, fc), sr.add, fc)
    fc.peak_aux_words += bt.storage_words() + 3 * len(js)
    return _dcsc_from_folded(js, is_, vs, a.rows, bt.rows, sr), fc


def hypersparse_gemm(a, b, sr: Semiring) -> Tuple[DcscMatrix, FlopCounter]:
    a, b = as_dcsc(a), as_dcsc(b)
    _check_inner(a, b)
    return hypersparse_gemm_bt(a, transpose(b), sr)


def stage_products(a: DcscMatrix, bt: DcscMatrix, sr: Semiring, fc: FlopCounter):
    """Unmerged product stream of A @ B as three parallel lists."""
    js, is_, vs = [], [], []
    for j, i, v in outer_products(a, bt, sr, fc):
        js.append(j)
        is_.append(i)
        vs.append(v)
    return js, is_, vs


class DeferredMerger:
    """Accumulates unmerged product streams and folds them lazily.

    Streams must be pushed in ascending inner-index order.  A merge folds the
    running partial sums with every pending stream through a stable multiway
    merge, so when and how often merging happens never changes the values.
    """

    def __init__(self, rows: int, cols: int, sr: Semiring, threshold: int):
        self.rows, self.cols, self.sr = rows, cols, sr
        self.threshold = max(0, int(threshold))
        self.running = ([], [], [])
        self.pending: list = []
        self.pending_triples = 0
        self.peak_pending = 0
        self.merges = 0
        self.fc = FlopCounter()

    def push(self, js, is_, vs) -> None:
        if not js:
            return
        self.pending.append((js, is_, vs))
        self.pending_triples += len(js)
        self.peak_pending = max(self.peak_pending, self.pending_triples)
        if self.pending_triples > self.threshold:
            self.merge()

    def merge(self) -> None:
        if not self.pending:
            return
        streams = [self.running] + self.pending
        merged = heapq.merge(*(zip(*s) for s in streams), key=lambda t: (t[0], t[1]))
        self.running = _fold_stream(merged, self.sr.add, self.fc)
        self.pending = []
        self.pending_triples = 0
        self.merges += 1

    def finalize(self) -> DcscMatrix:
        self.merge()
        js, is_, vs = self.running
        return _dcsc_from_folded(js, is_, vs, self.rows, self.cols, self.sr)


def default_merge_threshold(nnz_a: int, nnz_b: int) -> int:
    return 16 * max(nnz_a, nnz_b)


def sparse_add(a, b, sr: Semiring) -> DcscMatrix:
    """Entrywise A + B; collisions fold as add(A(i,j), B(i,j))."""
    a, b = as_dcsc(a), as_dcsc(b)
    _check_same(a, b)
    ra, ca, va = a.coo()
    rb, cb, vb = b.coo()
    ri, ci, vals = canonical_coo(np.concatenate((ra, rb)), np.concatenate((ca, cb)),
                                 np.concatenate((va, vb)), a.rows, a.cols, sr)
    return _dcsc_from_sorted(ri, ci, vals, a.rows, a.cols)


def _linear_keys(m: DcscMatrix) -> np.ndarray:
    r, c, _ = m.coo()
    return c * max(m.rows, 1) + r


def ewise_mult(a, b, negate_b: bool, sr: Semiring) -> DcscMatrix:
    """Elementwise A .* B, or A masked by the complement of B's pattern.

    The negated form keeps A(i,j) exactly where B(i,j) is zero; the dense
    negation is never formed.
    """
    a, b = as_dcsc(a), as_dcsc(b)
    _check_same(a, b)
    ka, kb = _linear_keys(a), _linear_keys(b)
    hit = np.isin(ka, kb, assume_unique=True)
    r, c, v = a.coo()
    if negate_b:
        keep = ~hit
        return _dcsc_from_sorted(r[keep], c[keep], v[keep], a.rows, a.cols)
    pos = np.searchsorted(kb, ka[hit])  # canonical keys are ascending
    mul = sr.multiply
    prods = [mul(x, y) for x, y in zip(v[hit].tolist(), b.num[pos].tolist())]
    vals = np.array(prods, dtype=sr.dtype)
    keep = ~sr.zero_mask(vals)
    return _dcsc_from_sorted(r[hit][keep], c[hit][keep], vals[keep], a.rows, a.cols)


def count_flops(a, b) -> int:
    """sum_k nnz(A(:,k)) * nnz(B(k,:)), without forming the product."""
    a, b = as_dcsc(a), as_dcsc(b)
    _check_inner(a, b)
    brows, bcounts = np.unique(b.ir, return_counts=True)
    acounts = np.diff(a.cp)
    common, ia, ib = np.intersect1d(a.jc, brows, assume_unique=True, return_indices=True)
    return int(np.dot(acounts[ia], bcounts[ib]))


def scale_columns(a, diag, sr: Semiring) -> DcscMatrix:
    """A @ D for diagonal D: column j of A times D(j,j); absent D(j,j) drops it."""
    a, diag = as_dcsc(a), as_dcsc(diag)
    _check_inner(a, diag)
    dr, dc, dv = diag.coo()
    if np.any(dr != dc):
        raise ValueError("scale_columns expects a diagonal matrix")
    r, c, v = a.coo()
    idx = np.searchsorted(dc, c)
    idx_c = np.minimum(idx, max(len(dc) - 1, 0))
    present = (idx < len(dc)) & (dc[idx_c] == c) if len(dc) else np.zeros(len(c), bool)
    mul = sr.multiply
    prods = [mul(x, y) for x, y in zip(v[present].tolist(), dv[idx_c[present]].tolist())]
    vals = np.array(prods, dtype=sr.dtype)
    keep = ~sr.zero_mask(vals)
    return _dcsc_from_sorted(r[present][keep], c[present][keep], vals[keep],
                             a.rows, a.cols)


def spgemm(a, b, sr: Semiring) -> DcscMatrix:
    return hypersparse_gemm(a, b, sr)[0]


def spgemm_csc(a, b, sr: Semiring) -> CscMatrix:
    return columnwise_spgemm(a, b, sr)[0]
