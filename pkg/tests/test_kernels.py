import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import ALL_SEMIRINGS, dense_matmul, random_sparse
from spsumma.errors import DimensionError
from spsumma.formats import (
    as_csc, as_dcsc, column_range, csc_from_coo, dcsc_from_coo, empty_dcsc, identity,
    transpose,
)
from spsumma.kernels import (
    DeferredMerger, FlopCounter, SpaAccumulator, columnwise_spgemm, count_flops, ewise_mult,
    hypersparse_gemm, scale_columns, sparse_add, stage_products,
)
from spsumma.semiring import BOOL_OR_AND, INT_PLUS_TIMES, MIN_PLUS, PLUS_TIMES


def _pair(seed, m, k, n, nnz_a, nnz_b, sr):
    rng = np.random.default_rng(seed)
    return random_sparse(rng, m, k, nnz_a, sr), random_sparse(rng, k, n, nnz_b, sr)


@pytest.mark.parametrize("sr", ALL_SEMIRINGS, ids=lambda s: s.name)
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(0, 14), k=st.integers(0, 14),
       n=st.integers(0, 14), nnz=st.integers(0, 40))
def test_kernels_agree_with_dense(sr, seed, m, k, n, nnz):
    a, b = _pair(seed, m, k, n, nnz, nnz, sr)
    c1, f1 = columnwise_spgemm(a, b, sr)
    c2, f2 = hypersparse_gemm(a, b, sr)
    assert c1 == as_csc(c2)
    assert np.array_equal(c1.to_dense(sr), dense_matmul(a.to_dense(sr), b.to_dense(sr), sr))
    assert f1.multiplies == f2.multiplies == count_flops(a, b)
    assert f1.adds == f2.adds
    as_dcsc(c2).check(sr)


def test_identity_is_neutral():
    rng = np.random.default_rng(0)
    a = random_sparse(rng, 9, 7, 25)
    assert columnwise_spgemm(a, identity(7), PLUS_TIMES)[0] == a
    assert as_csc(hypersparse_gemm(identity(9), a, PLUS_TIMES)[0]) == a
    assert count_flops(a, identity(7)) == a.nnz


def test_small_exact_oracle():
    rng = np.random.default_rng(11)
    a = random_sparse(rng, 8, 8, 16)
    b = random_sparse(rng, 8, 8, 16)
    c, _ = columnwise_spgemm(a, b, PLUS_TIMES)
    assert np.array_equal(c.to_dense(), dense_matmul(a.to_dense(), b.to_dense(), PLUS_TIMES))


def test_boolean_two_step_reachability_on_cycle():
    n = 4
    src = np.arange(n)
    adj = csc_from_coo(src, (src + 1) % n, np.ones(n, bool), n, n, BOOL_OR_AND)
    two, _ = columnwise_spgemm(adj, adj, BOOL_OR_AND)
    paths = {(i, j) for i in range(n) for m in range(n) for j in range(n)
             if adj.to_dense(BOOL_OR_AND)[i, m] and adj.to_dense(BOOL_OR_AND)[m, j]}
    r, c, _ = two.coo()
    assert set(zip(r.tolist(), c.tolist())) == paths == {(i, (i + 2) % n) for i in range(n)}


def test_min_plus_shortest_two_hop():
    w = csc_from_coo([0, 1, 0], [1, 2, 2], [1.0, 2.0, 5.0], 3, 3, MIN_PLUS)
    d2, _ = hypersparse_gemm(w, w, MIN_PLUS)
    assert d2.to_triples().entries == [(0, 2, 3.0)]


def test_empty_and_rank_one():
    a = empty_dcsc(5, 4)
    b = as_dcsc(random_sparse(np.random.default_rng(1), 4, 6, 10))
    c, fc = hypersparse_gemm(a, b, PLUS_TIMES)
    assert c.nnz == 0 and fc.multiplies == 0
    col = dcsc_from_coo([0, 2, 4], [3, 3, 3], [1.0, 2.0, 3.0], 5, 4)
    row = dcsc_from_coo([3, 3], [1, 5], [1.0, 1.0], 4, 6)
    c, fc = hypersparse_gemm(col, row, PLUS_TIMES)
    assert c.nnz == 3 * 2 == fc.multiplies


def test_hypersparse_matches_columnwise_at_large_dimension():
    rng = np.random.default_rng(5)
    n = 10**6
    a = dcsc_from_coo(rng.integers(0, n, 100), rng.integers(0, 50, 100), rng.random(100), n, n)
    b = dcsc_from_coo(rng.integers(0, 50, 100), rng.integers(0, n, 100), rng.random(100), n, n)
    c, _ = hypersparse_gemm(a, b, PLUS_TIMES)
    c2, _ = columnwise_spgemm(as_csc(a), as_csc(b), PLUS_TIMES)
    assert as_csc(c) == c2


def test_peak_aux_independent_of_dimension():
    rng = np.random.default_rng(9)
    r, c = rng.integers(0, 1000, 1000), rng.integers(0, 1000, 1000)
    v = rng.random(1000)
    peaks = []
    for n in (10**3, 10**6):
        a = dcsc_from_coo(r, c, v, n, n)
        peaks.append(hypersparse_gemm(a, a, PLUS_TIMES)[1].peak_aux_words)
    assert peaks[0] == peaks[1]


def test_dimension_mismatch():
    a = random_sparse(np.random.default_rng(0), 3, 4, 3)
    with pytest.raises(DimensionError):
        columnwise_spgemm(a, a, PLUS_TIMES)
    with pytest.raises(DimensionError):
        hypersparse_gemm(a, a, PLUS_TIMES)
    with pytest.raises(DimensionError):
        sparse_add(a, transpose(as_dcsc(a)), PLUS_TIMES)
    with pytest.raises(DimensionError):
        count_flops(a, a)


def test_spa_clears_only_occupied():
    spa = SpaAccumulator(100)
    assert not spa.accumulate(7, 1.0, PLUS_TIMES.add)
    assert spa.accumulate(7, 2.0, PLUS_TIMES.add)
    spa.accumulate(3, -1.0, PLUS_TIMES.add)
    spa.accumulate(3, 1.0, PLUS_TIMES.add)
    assert spa.flush(0.0) == ([7], [3.0])
    assert not any(spa.flags) and spa.occupied == []


@pytest.mark.parametrize("sr", ALL_SEMIRINGS, ids=lambda s: s.name)
def test_sparse_add(sr):
    rng = np.random.default_rng(4)
    a = random_sparse(rng, 10, 10, 30, sr)
    b = random_sparse(rng, 10, 10, 30, sr)
    got = sparse_add(a, b, sr)
    assert np.array_equal(got.to_dense(sr), sr.ufunc_add(a.to_dense(sr), b.to_dense(sr)))
    assert as_csc(sparse_add(a, empty_dcsc(10, 10, sr), sr)) == a


def test_sparse_add_doubles_and_disjoint():
    rng = np.random.default_rng(2)
    a = random_sparse(rng, 12, 12, 30)
    twice = sparse_add(a, a, PLUS_TIMES)
    assert np.array_equal(twice.ir, a.ir) and np.array_equal(twice.num, 2 * a.num)
    r, c, v = a.coo()
    upper = csc_from_coo(r[r < 6], c[r < 6], v[r < 6], 12, 12)
    lower = csc_from_coo(r[r >= 6], c[r >= 6], v[r >= 6], 12, 12)
    assert sparse_add(upper, lower, PLUS_TIMES).nnz == upper.nnz + lower.nnz


@pytest.mark.parametrize("sr", ALL_SEMIRINGS, ids=lambda s: s.name)
def test_ewise_mult(sr):
    rng = np.random.default_rng(6)
    a = random_sparse(rng, 9, 11, 40, sr)
    m = random_sparse(rng, 9, 11, 40, sr)
    da, dm = a.to_dense(sr), m.to_dense(sr)
    has = dm != sr.zero
    masked = ewise_mult(a, m, True, sr).to_dense(sr)
    assert np.array_equal(masked, np.where(has, sr.zero, da))
    both = ewise_mult(a, m, False, sr).to_dense(sr)
    assert np.array_equal(both, np.where(has & (da != sr.zero), sr.ufunc_mul(da, dm), sr.zero))
    assert as_csc(ewise_mult(a, empty_dcsc(9, 11, sr), True, sr)) == a
    assert ewise_mult(a, a, True, sr).nnz == 0


def test_count_flops_for_permutation_rows():
    rng = np.random.default_rng(8)
    a = random_sparse(rng, 20, 20, 60)
    rows = rng.permutation(20)[:7]
    r = csc_from_coo(np.arange(7), rows, np.ones(7), 7, 20)
    ra, _ = hypersparse_gemm(r, a, PLUS_TIMES)
    assert count_flops(r, a) == ra.nnz <= a.nnz


def test_scale_columns():
    rng = np.random.default_rng(3)
    a = random_sparse(rng, 6, 8, 20)
    d = csc_from_coo([0, 3, 5], [0, 3, 5], [2.0, -1.0, 0.5], 8, 8)
    assert np.array_equal(scale_columns(a, d, PLUS_TIMES).to_dense(), a.to_dense() @ d.to_dense())


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), threshold=st.integers(0, 50), parts=st.integers(1, 6))
def test_deferred_merge_never_changes_values(seed, threshold, parts):
    rng = np.random.default_rng(seed)
    a, b = random_sparse(rng, 10, 12, 40), random_sparse(rng, 12, 9, 40)
    want, _ = hypersparse_gemm(a, b, PLUS_TIMES)
    merger = DeferredMerger(10, 9, PLUS_TIMES, threshold)
    ad, bt = as_dcsc(a), transpose(as_dcsc(b))
    bounds = np.linspace(0, 12, parts + 1).astype(int)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        merger.push(*stage_products(column_range(ad, lo, hi), column_range(bt, lo, hi),
                                    PLUS_TIMES, FlopCounter()))
    assert merger.finalize() == want
    # pending triples never exceed the threshold by more than one stream
    assert merger.peak_pending <= threshold + count_flops(a, b)


def test_real_values_cancel_to_nothing():
    a = csc_from_coo([0, 0], [0, 1], [1.0, -1.0], 1, 2)
    b = csc_from_coo([0, 1], [0, 0], [1.0, 1.0], 2, 1)
    assert columnwise_spgemm(a, b, PLUS_TIMES)[0].nnz == 0
    assert hypersparse_gemm(a, b, PLUS_TIMES)[0].nnz == 0


def test_integer_semiring_exact():
    rng = np.random.default_rng(12)
    a = random_sparse(rng, 30, 30, 200, INT_PLUS_TIMES)
    c, _ = hypersparse_gemm(a, a, INT_PLUS_TIMES)
    assert np.array_equal(c.to_dense(INT_PLUS_TIMES), a.to_dense(INT_PLUS_TIMES) @ a.to_dense(INT_PLUS_TIMES))
    assert c.num.dtype == np.int64
