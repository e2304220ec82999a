import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_sparse
from spsumma.errors import ConfigurationError, DeadlockError
from spsumma.formats import csc_from_coo, transpose_csc
from spsumma.grid import (
    CSV_COLUMNS, DistVector, GridConfig, alltoall, block_bounds, distribute, gather, pack,
    run_spmd, scatter_from_diagonal, transpose_exchange, unpack,
)

MODES = ["seq", "conc"]
GRIDS = [(1, 1), (2, 2), (3, 2), (2, 3), (4, 4)]


def test_grid_config():
    g = GridConfig.parse("3x2")
    assert (g.pr, g.pc, g.p) == (3, 2, 6) and not g.square
    assert g.ranks()[:3] == [(0, 0), (0, 1), (1, 0)]
    assert g.rank_of(g.rank_id((2, 1))) == (2, 1)
    with pytest.raises(ConfigurationError):
        GridConfig(0, 2)
    with pytest.raises(ConfigurationError):
        GridConfig.parse("3by2")


def test_ragged_blocks_tile_exactly():
    for n in range(0, 20):
        for parts in range(1, 6):
            spans = [block_bounds(n, parts, t) for t in range(parts)]
            covered = [i for lo, hi in spans for i in range(lo, hi)]
            assert covered == list(range(n))


def test_nine_by_nine_on_three_by_three():
    a = random_sparse(np.random.default_rng(0), 9, 9, 20)
    d = distribute(a, GridConfig(3, 3))
    assert all(b.shape == (3, 3) for b in d.blocks.values())
    assert gather(d) == a


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(0, 13), n=st.integers(0, 13),
       grid=st.sampled_from(GRIDS))
def test_distribute_gather_roundtrip(seed, m, n, grid):
    a = random_sparse(np.random.default_rng(seed), m, n, 30)
    d = distribute(a, GridConfig(*grid))
    assert gather(d) == a
    assert d.nnz == a.nnz


def test_empty_on_three_by_three():
    a = csc_from_coo([], [], [], 7, 5)
    assert gather(distribute(a, GridConfig(3, 3))) == a


@pytest.mark.parametrize("mode", MODES)
def test_broadcast_accounting(mode):
    g = GridConfig(2, 3)
    payload = pack(csc_from_coo(np.arange(10) % 5, np.arange(10) // 2, np.ones(10), 5, 5))
    assert len(payload) == 10

    def program(ctx):
        got = yield from ctx.broadcast("row", 1, payload if ctx.j == 1 else None)
        return unpack(got)

    res, stats = run_spmd(g, program, mode=mode)
    root = stats.per_rank("bcast_row")[(0, 1)]
    assert (root.messages, root.words) == (2, 60)
    assert stats.totals("bcast_row").words == stats.totals("bcast_row").recv_words
    assert all(res[r] == unpack(payload) for r in g.ranks())


def test_broadcast_group_of_one_is_free():
    def program(ctx):
        return (yield from ctx.broadcast("row", 0, np.arange(5)))

    _, stats = run_spmd(GridConfig(3, 1), program)
    assert stats.totals().messages == 0 and stats.totals().words == 0


def test_broadcast_tree_latency():
    def program(ctx):
        return (yield from ctx.broadcast("col", 0, np.arange(4) if ctx.i == 0 else None))

    _, flat = run_spmd(GridConfig(8, 1), program, latency="flat")
    _, tree = run_spmd(GridConfig(8, 1), program, latency="tree")
    assert flat.totals().messages == 7 and tree.totals().messages == 3
    assert flat.totals().words == tree.totals().words == 28


def test_broadcast_root_outside_group():
    def program(ctx):
        return (yield from ctx.broadcast("row", 5, None))

    with pytest.raises(ConfigurationError):
        run_spmd(GridConfig(2, 2), program)


@pytest.mark.parametrize("mode", MODES)
def test_scatter_six_indices_down_three_ranks(mode):
    g = GridConfig(3, 3)
    i_vec = np.array([7, 2, 5, 8, 1, 3]) - 1

    def program(ctx):
        items = ctx.local.get("items")
        return (yield from ctx.scatter_from_diagonal(items))

    res, stats = run_spmd(g, program, mode=mode, local={(0, 0): {"items": i_vec}})
    pieces = [res[(t, 0)] for t in range(3)]
    assert [len(p) for p in pieces] == [2, 2, 2]
    assert np.concatenate(pieces).tolist() == i_vec.tolist()
    assert stats.totals("scatter").words == 4


@pytest.mark.parametrize("mode", MODES)
def test_scatter_roundtrip(mode):
    g = GridConfig(3, 3)
    vec = np.arange(20) * 3
    v = DistVector.from_array(vec, g)
    assert v.to_array().tolist() == vec.tolist()
    res, _ = scatter_from_diagonal(v, mode=mode)
    for j in range(3):
        col = np.concatenate([res[(i, j)] for i in range(3)])
        assert col.tolist() == v.pieces[(j, j)].tolist()
    res_row, _ = scatter_from_diagonal(v, axis="row", mode=mode)
    for i in range(3):
        assert np.concatenate([res_row[(i, j)] for j in range(3)]).tolist() == v.pieces[(i, i)].tolist()


def test_scatter_single_row_is_free():
    v = DistVector.from_array(np.arange(5), GridConfig(1, 1))
    _, stats = scatter_from_diagonal(v)
    assert stats.totals().messages == 0


def test_diagonal_vector_needs_square_grid():
    with pytest.raises(ConfigurationError):
        DistVector.from_array(np.arange(4), GridConfig(2, 3))


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("grid", [(2, 2), (3, 3)])
def test_transpose_exchange(mode, grid):
    g = GridConfig(*grid)
    a = random_sparse(np.random.default_rng(5), 11, 7, 40)
    d = distribute(a, g)
    t, stats = transpose_exchange(d, mode=mode)
    assert gather(t) == transpose_csc(a)
    back, _ = transpose_exchange(t, mode=mode)
    assert gather(back) == a
    pairs = g.p - g.pr
    assert stats.totals("transpose").messages == pairs


def test_transpose_of_diagonal_matrix_stays_local():
    a = csc_from_coo(np.arange(6), np.arange(6), np.ones(6), 6, 6)
    t, stats = transpose_exchange(distribute(a, GridConfig(3, 3)))
    assert stats.totals().words == 0 and gather(t) == a


def test_transpose_needs_square_grid():
    with pytest.raises(ConfigurationError):
        transpose_exchange(distribute(random_sparse(np.random.default_rng(0), 4, 4, 3),
                                      GridConfig(1, 2)))


@pytest.mark.parametrize("mode", MODES)
def test_alltoall(mode):
    g = GridConfig(2, 3)
    vec = np.arange(30)
    v = DistVector.from_array(vec, g, "block")
    ends = [block_bounds(30, 6, t)[1] for t in range(6)]
    _, st_same = alltoall(v, lambda x: np.searchsorted(ends, x, side="right"), mode=mode)
    assert st_same.totals().messages == 0
    res, stats = alltoall(v, lambda x: (x * 7) % 6, mode=mode)
    got = np.sort(np.concatenate([res[r] for r in g.ranks()]))
    assert got.tolist() == vec.tolist()
    for rid, rank in enumerate(g.ranks()):
        assert all((x * 7) % 6 == rid for x in res[rank])
    t = stats.totals("alltoall")
    assert t.words == t.recv_words


def test_alltoall_rejects_bad_rank():
    v = DistVector.from_array(np.arange(8), GridConfig(2, 2), "block")
    with pytest.raises(ConfigurationError):
        alltoall(v, lambda x: np.full(len(x), 9))


@pytest.mark.parametrize("mode", MODES)
def test_deadlock_names_blocked_ranks(mode):
    def program(ctx):
        if ctx.rank == (0, 0):
            return None
        got = yield ctx.recv((0, 0), "never")
        return got

    with pytest.raises(DeadlockError) as info:
        run_spmd(GridConfig(1, 2), program, mode=mode)
    assert "P(0, 1)" in str(info.value)


def test_empty_program():
    res, stats = run_spmd(GridConfig(2, 2), lambda ctx: ctx.rank)
    assert res[(1, 0)] == (1, 0)
    assert stats.rows() == []


def test_errors_in_ranks_surface():
    def program(ctx):
        if ctx.rank == (1, 1):
            raise RuntimeError("boom")
        return 1

    for mode in MODES:
        with pytest.raises(RuntimeError):
            run_spmd(GridConfig(2, 2), program, mode=mode)


def test_modes_agree_on_ring_exchange():
    g = GridConfig(3, 3)

    def program(ctx):
        rid = g.rank_id(ctx.rank)
        nxt = g.rank_of((rid + 1) % g.p)
        prv = g.rank_of((rid - 1) % g.p)
        ctx.send(nxt, "ring", np.arange(rid + 1))
        got = yield ctx.recv(prv, "ring")
        ctx.add_compute(len(got), 0)
        return got.sum()

    a = run_spmd(g, program, mode="seq")
    b = run_spmd(g, program, mode="conc")
    assert a[0] == b[0] and a[1] == b[1]


def test_csv_schema(tmp_path):
    def program(ctx):
        ctx.stage = 0
        yield from ctx.broadcast("row", 0, np.arange(3) if ctx.j == 0 else None)
        ctx.add_compute(2, 1)

    _, stats = run_spmd(GridConfig(2, 2), program)
    path = tmp_path / "stats.csv"
    stats.to_csv(path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == CSV_COLUMNS
    assert {r["collective"] for r in rows} == {"bcast_row", "compute"}
    assert sum(int(r["multiplies"]) for r in rows) == 8
