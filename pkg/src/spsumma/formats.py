"""Triples, CSC and DCSC storage.

Indices are 0-based everywhere.  Canonical matrices have sorted,
duplicate-free row indices in every column and never store an element equal
to the semiring zero.  All arrays are made read-only on construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import BoundsError
from .semiring import PLUS_TIMES, Semiring

INDEX = np.int64


def _frozen(a, dtype=None) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass
class OpCounter:
    """Counts elementary steps of slicing/scanning operations."""
    steps: int = 0


@dataclass(frozen=True, eq=False)
class TripleList:
    rows: int
    cols: int
    ri: np.ndarray
    ci: np.ndarray
    vals: np.ndarray

    @classmethod
    def from_entries(cls, rows, cols, entries: Iterable, dtype=np.float64) -> "TripleList":
        entries = list(entries)
        ri = np.array([e[0] for e in entries], dtype=INDEX)
        ci = np.array([e[1] for e in entries], dtype=INDEX)
        vals = np.array([e[2] for e in entries], dtype=dtype)
        return cls(rows, cols, ri, ci, vals)

    @property
    def entries(self) -> list:
        return list(zip(self.ri.tolist(), self.ci.tolist(), self.vals.tolist()))

    def __len__(self) -> int:
        return len(self.ri)


def canonical_coo(ri, ci, vals, nrows, ncols, sr: Semiring):
    """Sort by (column, row), fold duplicates with ``sr.add`` in input order,
    drop zeros.  Returns three arrays."""
    ri = np.asarray(ri, dtype=INDEX)
    ci = np.asarray(ci, dtype=INDEX)
    vals = sr.cast(vals)
    if len(ri) != len(ci) or len(ri) != len(vals):
        raise ValueError("triple arrays differ in length")
    if len(ri):
        if ri.min() < 0 or ri.max() >= nrows or ci.min() < 0 or ci.max() >= ncols:
            bad = np.flatnonzero((ri < 0) | (ri >= nrows) | (ci < 0) | (ci >= ncols))[0]
            raise BoundsError(
                f"entry ({ri[bad]}, {ci[bad]}) outside {nrows}x{ncols}")
    order = np.lexsort((ri, ci))  # stable
    ri, ci, vals = ri[order], ci[order], vals[order]
    if len(ri) > 1:
        same = (ri[1:] == ri[:-1]) & (ci[1:] == ci[:-1])
        if same.any():
            starts = np.flatnonzero(np.concatenate(([True], ~same)))
            ends = np.append(starts[1:], len(ri))
            folded = vals[starts].copy()
            add = sr.add
            pylist = vals.tolist()
            for t in np.flatnonzero(ends - starts > 1).tolist():
                acc = pylist[starts[t]]
                for x in pylist[starts[t] + 1:ends[t]]:
                    acc = add(acc, x)
                folded[t] = acc
            ri, ci, vals = ri[starts], ci[starts], folded
    keep = ~sr.zero_mask(vals)
    if not keep.all():
        ri, ci, vals = ri[keep], ci[keep], vals[keep]
    return ri, ci, vals


class _SparseBase:
    rows: int
    cols: int
    ir: np.ndarray
    num: np.ndarray

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.ir)

    def to_triples(self) -> TripleList:
        r, c, v = self.coo()
        return TripleList(self.rows, self.cols, r, c, v)

    def to_dense(self, sr: Semiring = PLUS_TIMES) -> np.ndarray:
        out = np.full(self.shape, sr.zero, dtype=sr.dtype)
        r, c, v = self.coo()
        out[r, c] = v
        return out


@dataclass(frozen=True, eq=False)
class CscMatrix(_SparseBase):
    rows: int
    cols: int
    cp: np.ndarray
    ir: np.ndarray
    num: np.ndarray

    def __post_init__(self):
        for name in ("cp", "ir"):
            object.__setattr__(self, name, _frozen(getattr(self, name), INDEX))
        object.__setattr__(self, "num", _frozen(self.num))
        if len(self.cp) != self.cols + 1:
            raise ValueError(f"CP has length {len(self.cp)}, expected {self.cols + 1}")

    def coo(self):
        ci = np.repeat(np.arange(self.cols, dtype=INDEX), np.diff(self.cp))
        return self.ir, ci, self.num

    def col(self, j):
        s, e = self.cp[j], self.cp[j + 1]
        return self.ir[s:e], self.num[s:e]

    def storage_words(self) -> int:
        return len(self.cp) + len(self.ir) + len(self.num)

    def check(self, sr: Optional[Semiring] = None) -> None:
        cp = self.cp
        assert cp[0] == 0 and cp[-1] == len(self.ir) == len(self.num)
        assert np.all(np.diff(cp) >= 0)
        for j in range(self.cols):
            seg = self.ir[cp[j]:cp[j + 1]]
            assert np.all(np.diff(seg) > 0), f"column {j} unsorted"
            assert len(seg) == 0 or (seg[0] >= 0 and seg[-1] < self.rows)
        if sr is not None:
            assert not sr.zero_mask(self.num).any(), "explicit zero stored"

    def __eq__(self, other):
        if not isinstance(other, CscMatrix):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self.cp, other.cp)
                and np.array_equal(self.ir, other.ir)
                and np.array_equal(self.num, other.num))

    def __repr__(self):
        return f"CscMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


@dataclass(frozen=True, eq=False)
class DcscMatrix(_SparseBase):
    rows: int
    cols: int
    jc: np.ndarray
    cp: np.ndarray
    ir: np.ndarray
    num: np.ndarray
    aux: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        for name in ("jc", "cp", "ir"):
            object.__setattr__(self, name, _frozen(getattr(self, name), INDEX))
        object.__setattr__(self, "num", _frozen(self.num))
        if self.aux is not None:
            object.__setattr__(self, "aux", _frozen(self.aux, INDEX))
        if len(self.cp) != len(self.jc) + 1:
            raise ValueError("CP must have length nzc + 1")

    @property
    def nzc(self) -> int:
        return len(self.jc)

    def coo(self):
        ci = np.repeat(self.jc, np.diff(self.cp))
        return self.ir, ci, self.num

    def storage_words(self) -> int:
        """Words held by JC, CP, IR and NUM (AUX excluded)."""
        return len(self.jc) + len(self.cp) + len(self.ir) + len(self.num)

    def aux_chunk(self) -> int:
        return max(1, math.ceil(self.cols / max(self.nzc, 1)))

    def with_aux(self) -> "DcscMatrix":
        """Copy carrying AUX: AUX[t] is the first position in JC whose column
        is >= t*cf, with cf = ceil(cols/nzc) so len(AUX) is O(nzc)."""
        cf = self.aux_chunk()
        nb = math.ceil(self.cols / cf) if self.cols else 0
        aux = np.empty(nb + 1, dtype=INDEX)
        k = 0
        jc = self.jc.tolist()
        for t in range(nb + 1):
            bound = t * cf
            while k < len(jc) and jc[k] < bound:
                k += 1
            aux[t] = k
        return DcscMatrix(self.rows, self.cols, self.jc, self.cp, self.ir, self.num, aux)

    def check(self, sr: Optional[Semiring] = None) -> None:
        assert len(self.cp) == len(self.jc) + 1
        assert self.cp[0] == 0 and self.cp[-1] == len(self.ir) == len(self.num)
        assert np.all(np.diff(self.jc) > 0), "JC not strictly increasing"
        assert np.all(np.diff(self.cp) > 0), "empty column referenced by JC"
        if self.nzc:
            assert self.jc[0] >= 0 and self.jc[-1] < self.cols
        for k in range(self.nzc):
            seg = self.ir[self.cp[k]:self.cp[k + 1]]
            assert np.all(np.diff(seg) > 0)
            assert seg[0] >= 0 and seg[-1] < self.rows
        if sr is not None:
            assert not sr.zero_mask(self.num).any(), "explicit zero stored"

    def __eq__(self, other):
        if not isinstance(other, DcscMatrix):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self.jc, other.jc)
                and np.array_equal(self.cp, other.cp)
                and np.array_equal(self.ir, other.ir)
                and np.array_equal(self.num, other.num))

    def __repr__(self):
        return f"DcscMatrix({self.rows}x{self.cols}, nnz={self.nnz}, nzc={self.nzc})"


# -- construction -----------------------------------------------------------

def _csc_from_sorted(ri, ci, vals, nrows, ncols) -> CscMatrix:
    cp = np.zeros(ncols + 1, dtype=INDEX)
    np.cumsum(np.bincount(ci, minlength=ncols), out=cp[1:])
    return CscMatrix(nrows, ncols, cp, ri, vals)


def _dcsc_from_sorted(ri, ci, vals, nrows, ncols) -> DcscMatrix:
    if len(ci) == 0:
        return DcscMatrix(nrows, ncols, np.empty(0, INDEX), np.zeros(1, INDEX),
                          np.empty(0, INDEX), vals[:0])
    starts = np.flatnonzero(np.concatenate(([True], ci[1:] != ci[:-1])))
    cp = np.append(starts, len(ci))
    return DcscMatrix(nrows, ncols, ci[starts], cp, ri, vals)


def csc_from_coo(ri, ci, vals, nrows, ncols, sr: Semiring = PLUS_TIMES) -> CscMatrix:
    ri, ci, vals = canonical_coo(ri, ci, vals, nrows, ncols, sr)
    return _csc_from_sorted(ri, ci, vals, nrows, ncols)


def dcsc_from_coo(ri, ci, vals, nrows, ncols, sr: Semiring = PLUS_TIMES) -> DcscMatrix:
    ri, ci, vals = canonical_coo(ri, ci, vals, nrows, ncols, sr)
    return _dcsc_from_sorted(ri, ci, vals, nrows, ncols)


def from_triples(t: TripleList, sr: Semiring = PLUS_TIMES) -> CscMatrix:
    """Canonical CSC from a raw triple list (duplicates folded with ``sr.add``)."""
    return csc_from_coo(t.ri, t.ci, t.vals, t.rows, t.cols, sr)


def from_dense(dense, sr: Semiring = PLUS_TIMES) -> CscMatrix:
    dense = np.asarray(dense)
    ri, ci = np.nonzero(dense != sr.zero)
    return csc_from_coo(ri, ci, dense[ri, ci], dense.shape[0], dense.shape[1], sr)


def empty_dcsc(nrows, ncols, sr: Semiring = PLUS_TIMES) -> DcscMatrix:
    return DcscMatrix(nrows, ncols, np.empty(0, INDEX), np.zeros(1, INDEX),
                      np.empty(0, INDEX), np.empty(0, sr.dtype))


def identity(n, sr: Semiring = PLUS_TIMES) -> CscMatrix:
    idx = np.arange(n, dtype=INDEX)
    return _csc_from_sorted(idx, idx, np.full(n, sr.one, dtype=sr.dtype), n, n)


# -- conversions ------------------------------------------------------------

def csc_to_dcsc(a: CscMatrix, build_aux: bool = False) -> DcscMatrix:
    counts = np.diff(a.cp)
    jc = np.flatnonzero(counts)
    cp = np.append(a.cp[jc], a.cp[-1]) if len(jc) else np.zeros(1, INDEX)
    out = DcscMatrix(a.rows, a.cols, jc, cp, a.ir, a.num)
    return out.with_aux() if build_aux else out


def dcsc_to_csc(a: DcscMatrix) -> CscMatrix:
    counts = np.zeros(a.cols, dtype=INDEX)
    counts[a.jc] = np.diff(a.cp)
    cp = np.zeros(a.cols + 1, dtype=INDEX)
    np.cumsum(counts, out=cp[1:])
    return CscMatrix(a.rows, a.cols, cp, a.ir, a.num)


def as_dcsc(a) -> DcscMatrix:
    return a if isinstance(a, DcscMatrix) else csc_to_dcsc(a)


def as_csc(a) -> CscMatrix:
    return a if isinstance(a, CscMatrix) else dcsc_to_csc(a)


def transpose(a: DcscMatrix) -> DcscMatrix:
    """(i, j, v) -> (j, i, v), rebuilt in canonical order.

    Only nnz-sized work arrays are used, so hypersparse blocks stay cheap.
    """
    r, c, v = a.coo()
    order = np.lexsort((c, r))
    return _dcsc_from_sorted(c[order], r[order], v[order], a.cols, a.rows)


def transpose_csc(a: CscMatrix) -> CscMatrix:
    r, c, v = a.coo()
    order = np.lexsort((c, r))
    return _csc_from_sorted(c[order], r[order], v[order], a.cols, a.rows)


def column_range(a: DcscMatrix, lo: int, hi: int,
                 counter: Optional[OpCounter] = None) -> DcscMatrix:
    """Columns [lo, hi) with column indices rebased to 0.

    Locating ``lo`` uses AUX when present (scan inside one chunk) and a binary
    search over JC otherwise; ``counter`` is charged for located/scanned JC
    slots, the columns emitted and the entries copied.
    """
    if not (0 <= lo <= hi <= a.cols):
        raise BoundsError(f"column range [{lo}, {hi}) outside 0..{a.cols}")
    steps = 0
    jc = a.jc
    if a.aux is not None and a.nzc:
        cf = a.aux_chunk()
        s = int(a.aux[lo // cf])
        while s < len(jc) and jc[s] < lo:
            s += 1
            steps += 1
        e = s
        while e < len(jc) and jc[e] < hi:
            e += 1
            steps += 1
    else:
        s = int(np.searchsorted(jc, lo, side="left"))
        e = int(np.searchsorted(jc, hi, side="left"))
        steps += 2 * max(1, math.ceil(math.log2(len(jc) + 1))) + (e - s)
    p0, p1 = int(a.cp[s]), int(a.cp[e])
    steps += p1 - p0
    if counter is not None:
        counter.steps += steps
    return DcscMatrix(a.rows, hi - lo, jc[s:e] - lo, a.cp[s:e + 1] - p0,
                      a.ir[p0:p1], a.num[p0:p1])


def row_range(a: DcscMatrix, lo: int, hi: int) -> DcscMatrix:
    """Rows [lo, hi) rebased to 0 (a filter over all entries)."""
    if not (0 <= lo <= hi <= a.rows):
        raise BoundsError(f"row range [{lo}, {hi}) outside 0..{a.rows}")
    r, c, v = a.coo()
    keep = (r >= lo) & (r < hi)
    return _dcsc_from_sorted(r[keep] - lo, c[keep], v[keep], hi - lo, a.cols)


def csc_from_unique(ri, ci, vals, nrows, ncols) -> CscMatrix:
    """Sort already-canonical entries (no duplicates, no zeros); dtype kept."""
    ri, ci = np.asarray(ri, dtype=INDEX), np.asarray(ci, dtype=INDEX)
    order = np.lexsort((ri, ci))
    return _csc_from_sorted(ri[order], ci[order], np.asarray(vals)[order], nrows, ncols)


def dcsc_from_unique(ri, ci, vals, nrows, ncols) -> DcscMatrix:
    ri, ci = np.asarray(ri, dtype=INDEX), np.asarray(ci, dtype=INDEX)
    order = np.lexsort((ri, ci))
    return _dcsc_from_sorted(ri[order], ci[order], np.asarray(vals)[order], nrows, ncols)
