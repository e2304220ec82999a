"""Seeded input generators.

All randomness comes from numpy's Philox 4x64 counter-based generator
(``np.random.Generator(np.random.Philox(seed))``), so a seed names the same
matrix on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DimensionError
from .formats import INDEX, CscMatrix, as_csc, as_dcsc, csc_from_coo
from .indexing import spref
from .semiring import PLUS_TIMES, Semiring

DUPLICATE_POLICIES = ("refill", "collapse")


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class RmatParams:
    scale: int
    nnz_per_col: int = 8
    a: float = 0.6
    b: float = 0.4 / 3
    c: float = 0.4 / 3
    d: float = 0.4 / 3
    seed: int = 0
    duplicates: str = "refill"

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError(f"scale must be non-negative, got {self.scale}")
        if self.nnz_per_col < 0:
            raise ValueError("nnz_per_col must be non-negative")
        probs = self.probabilities
        if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"quadrant probabilities must be >= 0 and sum to 1, got {probs}")
        if self.duplicates not in DUPLICATE_POLICIES:
            raise ValueError(f"duplicates must be one of {DUPLICATE_POLICIES}")

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    @property
    def n(self) -> int:
        return 1 << self.scale

    @property
    def requested_nnz(self) -> int:
        return self.nnz_per_col * self.n


def _quadrants(rng, shape, probs) -> np.ndarray:
    """Quadrant ids 0..3 (a: top-left, b: top-right, c: bottom-left,
    d: bottom-right)."""
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(shape), side="right").clip(0, 3)


def _rmat_edges(rng, count: int, scale: int, probs) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.zeros(count, dtype=INDEX)
    cols = np.zeros(count, dtype=INDEX)
    for _ in range(scale):
        q = _quadrants(rng, count, probs)
        rows = (rows << 1) | (q >> 1)
        cols = (cols << 1) | (q & 1)
    return rows, cols


def quadrant_frequencies(params: RmatParams, samples: int) -> np.ndarray:
    """Empirical top-level quadrant frequencies from ``samples`` draws."""
    q = _quadrants(make_rng(params.seed), samples, params.probabilities)
    return np.bincount(q, minlength=4) / samples


def rmat(params: RmatParams, sr: Semiring = PLUS_TIMES, *, max_rounds: int = 64) -> CscMatrix:
    """R-MAT matrix of order 2^scale by recursive quadrant descent.

    Every insertion carries a value uniform in [1, 2) (``sr.one`` for the
    boolean semiring); duplicates fold with ``sr.add``.  With
    ``duplicates="collapse"`` exactly ``requested_nnz`` insertions are made.
    With ``"refill"`` (default) insertions continue until ``requested_nnz``
    distinct positions exist (capped at n^2), and the stream is cut at the
    insertion that created the last one.
    """
    n = params.n
    rng = make_rng(params.seed)
    probs = params.probabilities
    target = params.requested_nnz
    if params.duplicates == "collapse":
        r, c = _rmat_edges(rng, target, params.scale, probs)
        v = rng.random(target) + 1.0
    else:
        target = min(target, n * n)
        rs, cs, vs = [], [], []
        seen = np.empty(0, dtype=INDEX)
        want = target
        for _ in range(max_rounds):
            if len(seen) >= target:
                break
            r, c = _rmat_edges(rng, want, params.scale, probs)
            v = rng.random(want) + 1.0
            keys = c * n + r
            fresh = ~np.isin(keys, seen)
            # first occurrence within the batch
            _, first = np.unique(keys, return_index=True)
            is_first = np.zeros(want, dtype=bool)
            is_first[first] = True
            new = fresh & is_first
            room = target - len(seen)
            if new.sum() > room:
                cut = np.flatnonzero(new)[room - 1] + 1
                r, c, v, keys, new = r[:cut], c[:cut], v[:cut], keys[:cut], new[:cut]
            rs.append(r), cs.append(c), vs.append(v)
            seen = np.union1d(seen, keys[new])
            want = max(target - len(seen), 1) * 2
        r = np.concatenate(rs) if rs else np.empty(0, INDEX)
        c = np.concatenate(cs) if cs else np.empty(0, INDEX)
        v = np.concatenate(vs) if vs else np.empty(0)
    vals = np.full(len(r), sr.one, dtype=sr.dtype) if sr.dtype == np.bool_ else v.astype(sr.dtype)
    return csc_from_coo(r, c, vals, n, n, sr)


def erdos_renyi(n_rows: int, n_cols: int, nnz_per_col: int, seed, sr: Semiring = PLUS_TIMES,
                *, strata: int = 1) -> CscMatrix:
    """Each column gets ``nnz_per_col`` distinct uniformly chosen rows.

    ``strata > 1`` splits the rows into that many equal strips and draws
    ``nnz_per_col / strata`` rows from each, so every row strip of every
    column holds the same count (used for exact per-rank volume checks).
    """
    if nnz_per_col < 0 or nnz_per_col > n_rows:
        raise ValueError(f"cannot place {nnz_per_col} distinct entries in a column of {n_rows}")
    if strata < 1 or n_rows % strata or nnz_per_col % strata:
        raise ValueError("strata must divide both n_rows and nnz_per_col")
    rng = make_rng(seed)
    height, per = n_rows // strata, nnz_per_col // strata
    picks = np.empty((n_cols, strata, per), dtype=INDEX)
    for s in range(strata):
        block = rng.integers(0, height, (n_cols, per))
        while per > 1:
            srt = np.sort(block, axis=1)
            bad = np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))
            if not len(bad):
                break
            block[bad] = rng.integers(0, height, (len(bad), per))
        picks[:, s, :] = block + s * height
    rows = picks.reshape(n_cols, -1).reshape(-1)
    cols = np.repeat(np.arange(n_cols, dtype=INDEX), nnz_per_col)
    v = rng.random(len(rows)) + 1.0
    vals = np.full(len(rows), sr.one, dtype=sr.dtype) if sr.dtype == np.bool_ else v.astype(sr.dtype)
    return csc_from_coo(rows, cols, vals, n_rows, n_cols, sr)


def restriction_operator(n: int, order: int, seed, sr: Semiring = PLUS_TIMES) -> CscMatrix:
    """S ((n/order) x n) with S(pi(v) // order, v) = one for a seeded random
    relabelling pi: every fine vertex joins exactly one aggregate of size
    ``order``."""
    if order < 1 or n % order:
        raise ValueError(f"order {order} must divide n={n}")
    pi = make_rng(seed).permutation(n).astype(INDEX)
    cols = np.arange(n, dtype=INDEX)
    return csc_from_coo(pi // order, cols, np.full(n, sr.one, dtype=sr.dtype), n // order, n, sr)


def random_permutation(n: int, seed) -> np.ndarray:
    return make_rng(seed).permutation(n).astype(INDEX)


def random_symmetric_permutation(a, seed, sr: Semiring = PLUS_TIMES) -> Tuple[CscMatrix, np.ndarray]:
    """P A P^T as A(r, r) for a seeded random permutation r."""
    a = as_dcsc(a)
    if a.rows != a.cols:
        raise DimensionError(f"symmetric permutation needs a square matrix, got {a.shape}")
    r = random_permutation(a.rows, seed)
    return spref(a, r, r, sr), r


def split_diagonal(a, sr: Semiring = PLUS_TIMES) -> Tuple[CscMatrix, CscMatrix]:
    """A = D + L with D the diagonal entries and L the rest."""
    a = as_csc(a)
    if a.rows != a.cols:
        raise DimensionError(f"diagonal split needs a square matrix, got {a.shape}")
    r, c, v = a.coo()
    on = r == c
    d = csc_from_coo(r[on], c[on], v[on], a.rows, a.cols, sr)
    off = csc_from_coo(r[~on], c[~on], v[~on], a.rows, a.cols, sr)
    return d, off


def diagonal_values(d, sr: Semiring = PLUS_TIMES) -> np.ndarray:
    """Dense diagonal of D (``sr.zero`` where absent)."""
    d = as_csc(d)
    out = np.full(d.cols, sr.zero, dtype=sr.dtype)
    r, c, v = d.coo()
    out[c[r == c]] = v[r == c]
    return out
