"""Sparse SUMMA on the simulated grid, plus the alpha-beta cost model."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

from .errors import ConfigurationError, DimensionError, ModelError
from .formats import column_range, transpose
from .grid import (
    WORDS_PER_ENTRY, CommStats, DistMatrix, GridConfig, pack, run_spmd, unpack,
)
from .kernels import (
    DeferredMerger, FlopCounter, default_merge_threshold, stage_products,
)
from .semiring import Semiring


@dataclass(frozen=True)
class Stage:
    q: int
    col_root: int        # processor column broadcasting its A slice
    a_cols: Tuple[int, int]
    row_root: int        # processor row broadcasting its B slice
    b_rows: Tuple[int, int]
    inner: Tuple[int, int]


@dataclass(frozen=True)
class SummaPlan:
    grid: GridConfig
    k: int
    blk: int

    @classmethod
    def build(cls, grid: GridConfig, k: int, blk: Optional[int] = None) -> "SummaPlan":
        if k % grid.pr or k % grid.pc:
            raise ConfigurationError(
                f"inner dimension {k} must be divisible by grid {grid} (pr={grid.pr}, pc={grid.pc})")
        if blk is None:
            blk = max(math.gcd(k // grid.pr, k // grid.pc), 1)
        if blk < 1 or (k // grid.pr) % blk or (k // grid.pc) % blk:
            raise ConfigurationError(
                f"blocking {blk} must divide k/pr={k // grid.pr} and k/pc={k // grid.pc}")
        return cls(grid, k, blk)

    @property
    def stages(self) -> int:
        return self.k // self.blk

    @property
    def a_width(self) -> int:
        return self.k // self.grid.pc

    @property
    def b_height(self) -> int:
        return self.k // self.grid.pr

    def stage(self, q: int) -> Stage:
        g0 = q * self.blk
        c, alo = divmod(g0, self.a_width)
        r, blo = divmod(g0, self.b_height)
        return Stage(q, c, (alo, alo + self.blk), r, (blo, blo + self.blk),
                     (g0, g0 + self.blk))

    def schedule(self) -> List[Stage]:
        return [self.stage(q) for q in range(self.stages)]


def legal_blockings(grid: GridConfig, k: int) -> List[int]:
    if k == 0 or k % grid.pr or k % grid.pc:
        return []
    g = math.gcd(k // grid.pr, k // grid.pc)
    return [b for b in range(1, g + 1) if g % b == 0]


def sparse_summa(a: DistMatrix, b: DistMatrix, blk: Optional[int] = None, sr: Semiring = None,
                 *, mode: str = "seq", latency: str = "flat", phase: str = "summa",
                 merge_threshold: Optional[int] = None) -> Tuple[DistMatrix, CommStats]:
    """C = A @ B on the grid shared by ``a`` and ``b``.

    Each rank transposes its B block, then for each of k/blk stages receives
    the A column slice broadcast along its processor row and the (transposed)
    B row slice broadcast along its processor column, and pushes the unmerged
    local products into a deferred merger.  B blocks are transposed back at
    the end.
    """
    if sr is None:
        raise TypeError("sparse_summa needs a semiring")
    if a.grid != b.grid:
        raise ConfigurationError("operands live on different grids")
    if a.cols != b.rows:
        raise DimensionError(f"inner dimensions differ: {a.shape} x {b.shape}")
    grid = a.grid
    plan = SummaPlan.build(grid, a.cols, blk)
    out_shape = DistMatrix(grid, a.rows, b.cols, {})

    def program(ctx):
        a_loc = ctx.local["A"]
        b_loc = ctx.local["B"]
        bt = transpose(b_loc)
        rows, _ = out_shape.block_shape(ctx.rank)
        cols = b_loc.cols
        thresh = (merge_threshold if merge_threshold is not None
                  else default_merge_threshold(a_loc.nnz, b_loc.nnz))
        merger = DeferredMerger(rows, cols, sr, thresh)
        for st in plan.schedule():
            ctx.stage = st.q
            a_out = pack(column_range(a_loc, *st.a_cols)) if ctx.j == st.col_root else None
            a_rem = unpack((yield from ctx.broadcast("row", st.col_root, a_out)))
            b_out = pack(column_range(bt, *st.b_rows)) if ctx.i == st.row_root else None
            bt_rem = unpack((yield from ctx.broadcast("col", st.row_root, b_out)))
            fc = FlopCounter()
            prods = stage_products(a_rem, bt_rem, sr, fc)
            before = merger.fc.adds
            merger.push(*prods)
            ctx.add_compute(fc.multiplies, merger.fc.adds - before)
        ctx.stage = plan.stages
        before = merger.fc.adds
        c_loc = merger.finalize()
        ctx.add_compute(0, merger.fc.adds - before)
        restored = transpose(bt)
        return c_loc, restored

    local = {r: {"A": a.blocks[r], "B": b.blocks[r]} for r in grid.ranks()}
    res, stats = run_spmd(grid, program, mode=mode, latency=latency, local=local, phase=phase)
    for r in grid.ranks():
        if res[r][1] != b.blocks[r]:
            raise AssertionError(f"B block on P{r} not restored")
    return DistMatrix(grid, a.rows, b.cols, {r: res[r][0] for r in grid.ranks()}), stats


@dataclass(frozen=True)
class CostModel:
    """Per-rank predictions for C = A @ B with n x n operands on a square grid."""
    p: int
    n: int
    d: float
    blk: int
    stages: int
    alpha: float
    beta: float
    latency: str
    bcast_entries_per_rank: float
    bcast_words_per_rank: float
    messages_per_rank: float
    t_comm: float
    flops_per_rank: float
    scan_per_rank: float
    t_comp: float

    def as_row(self) -> dict:
        return asdict(self)


def predict_costs(nnz_a: int, nnz_b: int, n: int, d: float, p: int, blk: int,
                  *, alpha: float = 1.0, beta: float = 1.0,
                  latency: str = "flat") -> CostModel:
    """Evaluate T_comm = stages*2*alpha + beta*sqrt(p)*(nnz(A)+nnz(B))/p and the
    computation terms d*n/sqrt(p) + (d^2 n/p) lg(d^2 n/p).

    A single rank has nothing to communicate, so p == 1 predicts zero words.
    """
    s = math.isqrt(p)
    if p < 1 or s * s != p:
        raise ModelError(f"cost model assumes a square grid; p={p} is not a perfect square")
    if blk < 1:
        raise ModelError("blocking must be positive")
    stages = n // blk
    entries = s * (nnz_a + nnz_b) / p if p > 1 else 0.0
    words = WORDS_PER_ENTRY * entries
    roots_per_dim = stages / s
    if latency == "tree":
        fan = math.ceil(math.log2(s)) if s > 1 else 0
    elif latency == "flat":
        fan = s - 1
    else:
        raise ModelError(f"unknown latency model {latency!r}")
    messages = 2 * roots_per_dim * fan
    t_comm = (2 * alpha * stages + beta * entries) if p > 1 else 0.0
    flops = d * d * n / p
    scan = d * n / s
    t_comp = scan + flops * math.log2(max(flops, 2.0))
    return CostModel(p, n, d, blk, stages, alpha, beta, latency, entries, words,
                     messages, t_comm, flops, scan, t_comp)


def measured_broadcast_words(stats: CommStats, phase=None):
    """Per-rank broadcast words as root or receiver (the model's quantity)."""
    return stats.broadcast_volume(phase)
