"""Dense reference oracles and random instance builders shared by the tests."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from spsumma.formats import csc_from_coo
from spsumma.semiring import BOOL_OR_AND, INT_PLUS_TIMES, MIN_PLUS, PLUS_TIMES

ALL_SEMIRINGS = [PLUS_TIMES, INT_PLUS_TIMES, BOOL_OR_AND, MIN_PLUS]


def random_values(rng, count, sr):
    if sr is BOOL_OR_AND:
        return np.ones(count, dtype=bool)
    if sr is INT_PLUS_TIMES:
        v = rng.integers(-4, 5, count)
        return np.where(v == 0, 1, v).astype(np.int64)
    if sr is MIN_PLUS:
        return rng.integers(0, 20, count).astype(float) + rng.random(count)
    return rng.standard_normal(count)


def random_sparse(rng, m, n, nnz, sr=PLUS_TIMES):
    """Random m x n matrix from ``nnz`` insertions (duplicates fold)."""
    if m == 0 or n == 0:
        nnz = 0
    ri = rng.integers(0, max(m, 1), nnz)
    ci = rng.integers(0, max(n, 1), nnz)
    return csc_from_coo(ri, ci, random_values(rng, nnz, sr), m, n, sr)


def dense_matmul(a, b, sr):
    """Left fold over ascending k of A(:,k) B(k,:) with the semiring ufuncs."""
    m, k = a.shape
    n = b.shape[1]
    c = np.full((m, n), sr.zero, dtype=sr.dtype)
    for t in range(k):
        c = sr.ufunc_add(c, sr.ufunc_mul(a[:, t:t + 1], b[t:t + 1, :])).astype(sr.dtype)
    return c


def dense_of(m, sr=PLUS_TIMES):
    return m.to_dense(sr)


@st.composite
def sparse_matrices(draw, max_dim=12, sr=PLUS_TIMES, shape=None):
    if shape is None:
        m = draw(st.integers(0, max_dim))
        n = draw(st.integers(0, max_dim))
    else:
        m, n = shape
    seed = draw(st.integers(0, 2**32 - 1))
    nnz = draw(st.integers(0, 2 * max_dim))
    return random_sparse(np.random.default_rng(seed), m, n, nnz, sr)
