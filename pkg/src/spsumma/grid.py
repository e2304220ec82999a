"""Deterministic simulated processor grid.

Rank programs are generator functions ``program(ctx)``.  Point-to-point sends
are buffered and never block; a receive is expressed as ``yield ctx.recv(...)``
and collectives as ``yield from ctx.broadcast(...)`` and friends.  The same
program runs under two drivers:

* ``"seq"``  round-robin supersteps in a single thread;
* ``"conc"`` one thread per rank, mailboxes guarded by a condition variable.

Every rank charges only its own counters, so results and ``CommStats`` do not
depend on the interleaving.  A superstep (or state) in which every live rank
waits on a message nobody sent raises :class:`DeadlockError`.

Word accounting: a matrix entry costs 3 words (row, col, value) and an index
costs 1 word.
"""
from __future__ import annotations

import csv
import inspect
import math
import threading
from contextlib import nullcontext
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, DeadlockError
from .formats import (
    INDEX, CscMatrix, DcscMatrix, TripleList, as_dcsc, csc_from_unique,
    dcsc_from_unique, empty_dcsc, transpose,
)

Rank = Tuple[int, int]

WORDS_PER_ENTRY = 3
LATENCY_MODELS = ("flat", "tree")
MODES = ("seq", "conc")


@dataclass(frozen=True)
class GridConfig:
    pr: int
    pc: int

    def __post_init__(self):
        if int(self.pr) < 1 or int(self.pc) < 1:
            raise ConfigurationError(f"grid must be at least 1x1, got {self.pr}x{self.pc}")

    @classmethod
    def parse(cls, text: str) -> "GridConfig":
        try:
            pr, pc = (int(x) for x in text.lower().split("x"))
        except ValueError:
            raise ConfigurationError(f"grid must look like PRxPC, got {text!r}") from None
        return cls(pr, pc)

    @property
    def p(self) -> int:
        return self.pr * self.pc

    @property
    def square(self) -> bool:
        return self.pr == self.pc

    def ranks(self):
        return [(i, j) for i in range(self.pr) for j in range(self.pc)]

    def rank_id(self, rank: Rank) -> int:
        return rank[0] * self.pc + rank[1]

    def rank_of(self, rid: int) -> Rank:
        return divmod(int(rid), self.pc)

    def __str__(self):
        return f"{self.pr}x{self.pc}"


def block_size(n: int, parts: int) -> int:
    return max(1, math.ceil(n / parts))


def block_bounds(n: int, parts: int, t: int) -> Tuple[int, int]:
    """Index range of block t when n is cut into ceil(n/parts)-sized blocks;
    trailing blocks are short or empty."""
    s = block_size(n, parts)
    return min(t * s, n), min((t + 1) * s, n)


def block_owner(idx, n: int, parts: int):
    return np.asarray(idx) // block_size(n, parts)


# -- message payloads -------------------------------------------------------

def pack(m) -> TripleList:
    """Serialise a block as triples with local indices."""
    r, c, v = m.coo()
    return TripleList(m.rows, m.cols, r.copy(), c.copy(), v.copy())


def unpack(t: TripleList) -> DcscMatrix:
    return dcsc_from_unique(t.ri, t.ci, t.vals, t.rows, t.cols)


def payload_words(obj) -> int:
    if obj is None:
        return 0
    if isinstance(obj, (DcscMatrix, CscMatrix)):
        return WORDS_PER_ENTRY * obj.nnz
    if isinstance(obj, TripleList):
        return WORDS_PER_ENTRY * len(obj)
    if isinstance(obj, np.ndarray):
        return int(obj.size)
    if isinstance(obj, (list, tuple)):
        return sum(payload_words(x) for x in obj)
    if isinstance(obj, (int, float, bool, np.integer, np.floating)):
        return 1
    raise TypeError(f"no word count for payload of type {type(obj).__name__}")


def _by_value(obj):
    if isinstance(obj, np.ndarray):
        return obj.copy()
    if isinstance(obj, TripleList):
        return TripleList(obj.rows, obj.cols, obj.ri.copy(), obj.ci.copy(), obj.vals.copy())
    if isinstance(obj, list):
        return [_by_value(x) for x in obj]
    if isinstance(obj, tuple):
        return tuple(_by_value(x) for x in obj)
    return obj  # immutable


# -- statistics -------------------------------------------------------------

@dataclass
class CommRecord:
    messages: int = 0
    words: int = 0
    recv_messages: int = 0
    recv_words: int = 0
    volume: int = 0  # payload words this rank took part in (root or receiver)

    def __iadd__(self, other: "CommRecord"):
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self


CSV_COLUMNS = ["phase", "stage", "rank_i", "rank_j", "collective", "messages", "words",
               "multiplies", "adds", "recv_messages", "recv_words", "volume"]


class CommStats:
    """Per-rank message/word counters keyed by (rank, phase, stage, collective),
    plus per-rank local multiply/add counts keyed by (rank, phase, stage)."""

    def __init__(self, grid: GridConfig):
        self.grid = grid
        self.comm: Dict[tuple, CommRecord] = {}
        self.compute: Dict[tuple, list] = {}

    def record(self, rank, phase, stage, kind) -> CommRecord:
        key = (tuple(rank), phase, stage, kind)
        rec = self.comm.get(key)
        if rec is None:
            rec = self.comm[key] = CommRecord()
        return rec

    def add_compute(self, rank, phase, stage, multiplies, adds) -> None:
        slot = self.compute.setdefault((tuple(rank), phase, stage), [0, 0])
        slot[0] += multiplies
        slot[1] += adds

    def merge(self, other: "CommStats") -> "CommStats":
        for key, rec in other.comm.items():
            self.record(*key).__iadd__(rec)
        for (rank, phase, stage), (m, a) in other.compute.items():
            self.add_compute(rank, phase, stage, m, a)
        return self

    def _match(self, key, kind, phase):
        if kind is not None:
            kinds = (kind,) if isinstance(kind, str) else tuple(kind)
            if key[3] not in kinds:
                return False
        return phase is None or key[1] == phase

    def totals(self, kind=None, phase=None) -> CommRecord:
        out = CommRecord()
        for key, rec in self.comm.items():
            if self._match(key, kind, phase):
                out += rec
        return out

    def per_rank(self, kind=None, phase=None) -> Dict[Rank, CommRecord]:
        out = {r: CommRecord() for r in self.grid.ranks()}
        for key, rec in self.comm.items():
            if self._match(key, kind, phase):
                out[key[0]] += rec
        return out

    def broadcast_volume(self, phase=None) -> Dict[Rank, int]:
        """Broadcast payload words each rank handled, as root or receiver."""
        return {r: rec.volume for r, rec in
                self.per_rank(("bcast_row", "bcast_col"), phase).items()}

    def multiplies(self, phase=None) -> int:
        return sum(v[0] for k, v in self.compute.items() if phase is None or k[1] == phase)

    def adds(self, phase=None) -> int:
        return sum(v[1] for k, v in self.compute.items() if phase is None or k[1] == phase)

    def rows(self):
        """Flat rows in the CSV schema, sorted deterministically."""
        out = []
        keys = set(self.comm) | {(r, ph, st, None) for (r, ph, st) in self.compute}
        for key in sorted(keys, key=lambda k: (str(k[1]), k[2], k[0], k[3] or "")):
            rank, phase, stage, kind = key
            rec = self.comm.get(key, CommRecord()) if kind else CommRecord()
            m, a = self.compute.get((rank, phase, stage), (0, 0)) if kind is None else (0, 0)
            out.append({"phase": phase, "stage": stage, "rank_i": rank[0], "rank_j": rank[1],
                        "collective": kind or "compute", "messages": rec.messages,
                        "words": rec.words, "multiplies": m, "adds": a,
                        "recv_messages": rec.recv_messages, "recv_words": rec.recv_words,
                        "volume": rec.volume})
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            w.writerows(self.rows())

    def __eq__(self, other):
        if not isinstance(other, CommStats):
            return NotImplemented
        return (self.grid == other.grid and self.comm == other.comm
                and self.compute == other.compute)

    def __repr__(self):
        t = self.totals()
        return (f"CommStats({self.grid}, messages={t.messages}, words={t.words}, "
                f"multiplies={self.multiplies()}, adds={self.adds()})")


# -- distributed containers -------------------------------------------------

@dataclass(eq=False)
class DistMatrix:
    grid: GridConfig
    rows: int
    cols: int
    blocks: Dict[Rank, DcscMatrix]

    @property
    def shape(self):
        return (self.rows, self.cols)

    def row_bounds(self, i):
        return block_bounds(self.rows, self.grid.pr, i)

    def col_bounds(self, j):
        return block_bounds(self.cols, self.grid.pc, j)

    def block_shape(self, rank):
        r0, r1 = self.row_bounds(rank[0])
        c0, c1 = self.col_bounds(rank[1])
        return r1 - r0, c1 - c0

    @property
    def nnz(self) -> int:
        return sum(b.nnz for b in self.blocks.values())

    def __eq__(self, other):
        if not isinstance(other, DistMatrix):
            return NotImplemented
        return (self.grid == other.grid and self.shape == other.shape
                and all(self.blocks[r] == other.blocks[r] for r in self.grid.ranks()))

    def __repr__(self):
        return f"DistMatrix({self.rows}x{self.cols} on {self.grid}, nnz={self.nnz})"


def distribute(a, g: GridConfig) -> DistMatrix:
    """2D block decomposition; block (i, j) holds rows/cols of block i/j with
    local indices."""
    r, c, v = a.coo()
    m, n = a.shape
    bi = block_owner(r, m, g.pr)
    bj = block_owner(c, n, g.pc)
    blocks = {}
    for i, j in g.ranks():
        r0, r1 = block_bounds(m, g.pr, i)
        c0, c1 = block_bounds(n, g.pc, j)
        sel = (bi == i) & (bj == j)
        blocks[(i, j)] = dcsc_from_unique(r[sel] - r0, c[sel] - c0, v[sel], r1 - r0, c1 - c0)
    return DistMatrix(g, m, n, blocks)


def gather(d: DistMatrix) -> CscMatrix:
    rs, cs, vs = [], [], []
    for rank in d.grid.ranks():
        r, c, v = d.blocks[rank].coo()
        rs.append(r + d.row_bounds(rank[0])[0])
        cs.append(c + d.col_bounds(rank[1])[0])
        vs.append(v)
    if not rs:
        rs, cs, vs = [np.empty(0, INDEX)] * 2 + [np.empty(0)]
    return csc_from_unique(np.concatenate(rs), np.concatenate(cs), np.concatenate(vs),
                           d.rows, d.cols)


def empty_dist(g: GridConfig, rows: int, cols: int, sr=None) -> DistMatrix:
    from .semiring import PLUS_TIMES
    sr = sr or PLUS_TIMES
    blocks = {}
    for i, j in g.ranks():
        r0, r1 = block_bounds(rows, g.pr, i)
        c0, c1 = block_bounds(cols, g.pc, j)
        blocks[(i, j)] = empty_dcsc(r1 - r0, c1 - c0, sr)
    return DistMatrix(g, rows, cols, blocks)


def blockwise(fn: Callable, *mats: DistMatrix, rows=None, cols=None) -> DistMatrix:
    """Apply a purely local operation block by block (no communication)."""
    first = mats[0]
    for other in mats[1:]:
        if other.grid != first.grid or other.shape != first.shape:
            raise ConfigurationError("blockwise operands must share grid and shape")
    blocks = {r: as_dcsc(fn(*(m.blocks[r] for m in mats))) for r in first.grid.ranks()}
    return DistMatrix(first.grid, rows or first.rows, cols or first.cols, blocks)


@dataclass(eq=False)
class DistVector:
    """Global vector held on diagonal ranks (chunk t on P(t,t)) or spread in
    row-major rank order over all ranks (``mode="block"``)."""
    grid: GridConfig
    length: int
    mode: str
    pieces: Dict[Rank, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_array(cls, values, g: GridConfig, mode: str = "diagonal") -> "DistVector":
        values = np.asarray(values)
        n = len(values)
        pieces = {}
        if mode == "diagonal":
            if not g.square:
                raise ConfigurationError("diagonal vector distribution needs a square grid")
            for t in range(g.pr):
                s, e = block_bounds(n, g.pr, t)
                pieces[(t, t)] = values[s:e].copy()
        elif mode == "block":
            for rid, rank in enumerate(g.ranks()):
                s, e = block_bounds(n, g.p, rid)
                pieces[rank] = values[s:e].copy()
        else:
            raise ConfigurationError(f"unknown vector mode {mode!r}")
        return cls(g, n, mode, pieces)

    def offset(self, rank) -> int:
        if self.mode == "diagonal":
            return block_bounds(self.length, self.grid.pr, rank[0])[0]
        return block_bounds(self.length, self.grid.p, self.grid.rank_id(rank))[0]

    def to_array(self) -> np.ndarray:
        order = sorted(self.pieces, key=self.offset)
        parts = [self.pieces[r] for r in order]
        return np.concatenate(parts) if parts else np.empty(0, INDEX)


# -- rank context -----------------------------------------------------------

@dataclass(frozen=True)
class Recv:
    src: Rank
    tag: Any

    def __str__(self):
        return f"recv(from P{self.src}, tag={self.tag})"


class _Transport:
    def __init__(self, concurrent: bool):
        self.boxes: Dict[Rank, Dict[tuple, list]] = {}
        self.cv = threading.Condition() if concurrent else None

    def put(self, dest, src, tag, payload):
        with (self.cv or nullcontext()):
            self.boxes.setdefault(dest, {}).setdefault((src, tag), []).append(payload)
            if self.cv is not None:
                self.cv.notify_all()

    def ready(self, dest, req: Recv) -> bool:
        return bool(self.boxes.get(dest, {}).get((req.src, req.tag)))

    def take(self, dest, req: Recv):
        return self.boxes[dest][(req.src, req.tag)].pop(0)


class RankContext:
    """Everything a rank program may touch: its id, its local state, its own
    counters, and the collectives."""

    def __init__(self, rank, grid, transport, stats, latency, phase, local):
        self.rank = tuple(rank)
        self.grid = grid
        self.local = local
        self.stage = -1
        self.phase = phase
        self.latency = latency
        self._t = transport
        self._stats = stats
        self._seq: Dict[tuple, int] = {}

    @property
    def i(self):
        return self.rank[0]

    @property
    def j(self):
        return self.rank[1]

    def _rec(self, kind) -> CommRecord:
        return self._stats.record(self.rank, self.phase, self.stage, kind)

    def _tag(self, key):
        n = self._seq.get(key, 0)
        self._seq[key] = n + 1
        return key + (n,)

    def _latency_units(self, fanout: int) -> int:
        if fanout <= 0:
            return 0
        if self.latency == "tree":
            return math.ceil(math.log2(fanout + 1))
        return fanout

    def add_compute(self, multiplies: int, adds: int) -> None:
        self._stats.add_compute(self.rank, self.phase, self.stage, multiplies, adds)

    # point to point
    def send(self, dest, tag, payload, kind="p2p") -> None:
        dest = tuple(dest)
        rec = self._rec(kind)
        rec.messages += 1
        w = payload_words(payload)
        rec.words += w
        rec.volume += w
        self._t.put(dest, self.rank, tag, _by_value(payload))

    def recv(self, src, tag) -> Recv:
        return Recv(tuple(src), tag)

    def _charge_recv(self, kind, payload, count=True):
        rec = self._rec(kind)
        w = payload_words(payload)
        if count:
            rec.recv_messages += 1
        rec.recv_words += w
        rec.volume += w

    def exchange(self, dest, tag, payload, kind="p2p"):
        """Send to ``dest`` then receive its matching message."""
        self.send(dest, tag, payload, kind)
        got = yield self.recv(dest, tag)
        self._charge_recv(kind, got)
        return got

    # collectives
    def broadcast(self, axis: str, root: int, payload=None):
        """Broadcast within processor row (``axis="row"``, root is a column
        index) or column (``axis="col"``, root is a row index).

        The root is charged (g-1) messages under the flat model or
        ceil(lg g) under the tree model, and (g-1) * payload words.
        """
        if axis == "row":
            size, me, group = self.grid.pc, self.j, self.i
            member = lambda t: (self.i, t)
            kind = "bcast_row"
        elif axis == "col":
            size, me, group = self.grid.pr, self.i, self.j
            member = lambda t: (t, self.j)
            kind = "bcast_col"
        else:
            raise ConfigurationError(f"axis must be 'row' or 'col', got {axis!r}")
        if not 0 <= root < size:
            raise ConfigurationError(f"root {root} not in {axis} group of size {size}")
        tag = self._tag((kind, group))
        if me == root:
            if size > 1:
                w = payload_words(payload)
                rec = self._rec(kind)
                rec.messages += self._latency_units(size - 1)
                rec.words += (size - 1) * w
                rec.volume += w
                for t in range(size):
                    if t != me:
                        self._t.put(member(t), self.rank, tag, _by_value(payload))
            return payload
        got = yield self.recv(member(root), tag)
        self._charge_recv(kind, got)
        return got

    def scatter_from_diagonal(self, items=None, dest: Optional[Callable] = None,
                              axis: str = "col"):
        """Personalised scatter from the diagonal rank of this rank's
        processor column (``axis="col"``, root P(j, j)) or processor row
        (``axis="row"``, root P(i, i)).

        ``items`` (rows of an array) is only read on the root.  By default
        member t of the group gets the contiguous share
        ``block_bounds(len(items), size, t)``; ``dest(items)`` may instead name
        the destination member of every item (order is kept).
        """
        g = self.grid
        if not g.square:
            raise ConfigurationError("scatter_from_diagonal needs a square grid")
        if axis == "col":
            size, me, group = g.pr, self.i, self.j
            member = lambda t: (t, self.j)
        elif axis == "row":
            size, me, group = g.pc, self.j, self.i
            member = lambda t: (self.i, t)
        else:
            raise ConfigurationError(f"axis must be 'row' or 'col', got {axis!r}")
        kind = "scatter"
        tag = self._tag((kind, axis, group))
        root = (group, group)
        if self.rank == root:
            items = np.asarray(items) if items is not None else np.empty(0, INDEX)
            if dest is None:
                shares = [items[slice(*block_bounds(len(items), size, t))] for t in range(size)]
            else:
                to = np.asarray(dest(items), dtype=INDEX) if len(items) else np.empty(0, INDEX)
                shares = [items[to == t] for t in range(size)]
            if size > 1:
                rec = self._rec(kind)
                rec.messages += self._latency_units(size - 1)
                sent = sum(payload_words(s) for t, s in enumerate(shares) if t != me)
                rec.words += sent
                rec.volume += payload_words(items)
                for t in range(size):
                    if t != me:
                        self._t.put(member(t), self.rank, tag, _by_value(shares[t]))
            return shares[me]
        got = yield self.recv(root, tag)
        self._charge_recv(kind, got)
        return got

    def alltoall(self, items, dest: Callable):
        """Personalised all-to-all: ``dest(items)`` gives each item's
        destination rank id.  Empty pieces are delivered but not charged.
        Received pieces are concatenated in source rank order."""
        g = self.grid
        kind = "alltoall"
        tag = self._tag((kind,))
        items = np.asarray(items)
        me = g.rank_id(self.rank)
        to = np.asarray(dest(items), dtype=INDEX) if len(items) else np.empty(0, INDEX)
        if len(to) and (to.min() < 0 or to.max() >= g.p):
            raise ConfigurationError(f"destination map names rank outside 0..{g.p - 1}")
        rec = self._rec(kind)
        pieces = {}
        for rid in range(g.p):
            piece = items[to == rid]
            if rid == me:
                pieces[rid] = piece
                continue
            if len(piece):
                rec.messages += 1
                w = payload_words(piece)
                rec.words += w
                rec.volume += w
            self._t.put(g.rank_of(rid), self.rank, tag, _by_value(piece))
        for rid in range(g.p):
            if rid == me:
                continue
            got = yield self.recv(g.rank_of(rid), tag)
            self._charge_recv(kind, got, count=len(got) > 0)
            pieces[rid] = got
        parts = [pieces[r] for r in range(g.p)]
        return np.concatenate(parts) if parts else items[:0]

    def transpose_block(self, block: DcscMatrix):
        """Pairwise exchange with P(j, i); returns the transpose of that
        rank's block (local transpose on the diagonal)."""
        if not self.grid.square:
            raise ConfigurationError("transpose exchange needs a square grid")
        mine = transpose(block)
        if self.i == self.j:
            return mine
        partner = (self.j, self.i)
        tag = self._tag(("transpose",))
        got = yield from self.exchange(partner, tag, pack(mine), kind="transpose")
        return unpack(got)


# -- drivers ----------------------------------------------------------------

def _start(program, ctx):
    out = program(ctx)
    return out if inspect.isgenerator(out) else None, out


def _run_seq(g, program, contexts, transport):
    gens, results, waiting = {}, {}, {}

    def advance(rank, value):
        gen = gens[rank]
        try:
            req = gen.send(value)
            while True:
                if not isinstance(req, Recv):
                    raise TypeError(f"rank program yielded {req!r}; only Recv is allowed")
                if transport.ready(rank, req):
                    req = gen.send(transport.take(rank, req))
                else:
                    waiting[rank] = req
                    return
        except StopIteration as stop:
            results[rank] = stop.value

    for rank in g.ranks():
        gen, value = _start(program, contexts[rank])
        if gen is None:
            results[rank] = value
        else:
            gens[rank] = gen
            advance(rank, None)
    while waiting:
        progressed = False
        for rank in g.ranks():
            req = waiting.get(rank)
            if req is not None and transport.ready(rank, req):
                del waiting[rank]
                advance(rank, transport.take(rank, req))
                progressed = True
        if not progressed:
            raise DeadlockError({r: str(w) for r, w in waiting.items()})
    return results


class _Abort(Exception):
    pass


def _run_conc(g, program, contexts, transport):
    cv = transport.cv
    results, errors, blocked = {}, {}, {}
    live = [g.p]
    deadlock = []

    def stuck():
        return (len(blocked) == live[0]
                and not any(transport.ready(r, q) for r, q in blocked.items()))

    def wait_for(rank, req):
        with cv:
            while not transport.ready(rank, req):
                if deadlock or errors:
                    raise _Abort()
                blocked[rank] = req
                if stuck():
                    deadlock.append({r: str(w) for r, w in blocked.items()})
                    cv.notify_all()
                    raise _Abort()
                cv.wait()
                blocked.pop(rank, None)
            blocked.pop(rank, None)
            return transport.take(rank, req)

    def worker(rank):
        try:
            gen, value = _start(program, contexts[rank])
            if gen is not None:
                try:
                    req = next(gen)
                    while True:
                        if not isinstance(req, Recv):
                            raise TypeError(f"rank program yielded {req!r}")
                        req = gen.send(wait_for(rank, req))
                except StopIteration as stop:
                    value = stop.value
            results[rank] = value
        except _Abort:
            pass
        except BaseException as exc:  # surfaced in the caller
            with cv:
                errors[rank] = exc
                cv.notify_all()
        finally:
            with cv:
                live[0] -= 1
                blocked.pop(rank, None)
                if live[0] and stuck() and not deadlock and not errors:
                    deadlock.append({r: str(w) for r, w in blocked.items()})
                cv.notify_all()

    threads = [threading.Thread(target=worker, args=(r,), daemon=True) for r in g.ranks()]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[min(errors)]
    if deadlock:
        raise DeadlockError(deadlock[0])
    return results


def run_spmd(g: GridConfig, program, *, mode: str = "seq", latency: str = "flat",
             local: Optional[Dict[Rank, dict]] = None, phase: str = "main"):
    """Run ``program(ctx)`` on every rank; returns (results by rank, CommStats)."""
    if mode not in MODES:
        raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
    if latency not in LATENCY_MODELS:
        raise ConfigurationError(f"latency must be one of {LATENCY_MODELS}, got {latency!r}")
    transport = _Transport(concurrent=(mode == "conc"))
    per_rank = {r: CommStats(g) for r in g.ranks()}
    contexts = {r: RankContext(r, g, transport, per_rank[r], latency, phase,
                               dict((local or {}).get(r, {}))) for r in g.ranks()}
    driver = _run_seq if mode == "seq" else _run_conc
    results = driver(g, program, contexts, transport)
    stats = CommStats(g)
    for r in g.ranks():
        stats.merge(per_rank[r])
    return results, stats


# -- whole-grid convenience wrappers ----------------------------------------

def transpose_exchange(d: DistMatrix, *, mode="seq", latency="flat", phase="transpose"):
    """Global transpose on a square grid: new block (i, j) is the transpose
    of old block (j, i)."""
    if not d.grid.square:
        raise ConfigurationError("transpose exchange needs a square grid")

    def program(ctx):
        return (yield from ctx.transpose_block(ctx.local["block"]))

    local = {r: {"block": d.blocks[r]} for r in d.grid.ranks()}
    res, stats = run_spmd(d.grid, program, mode=mode, latency=latency, local=local, phase=phase)
    return DistMatrix(d.grid, d.cols, d.rows, res), stats


def scatter_from_diagonal(v: DistVector, dest=None, *, axis="col", mode="seq",
                          latency="flat", phase="scatter"):
    """Scatter each diagonal piece along its processor column or row."""
    if v.mode != "diagonal":
        raise ConfigurationError("scatter_from_diagonal expects a diagonal-mode vector")

    def program(ctx):
        items = ctx.local.get("items")
        return (yield from ctx.scatter_from_diagonal(items, dest, axis))

    local = {r: {"items": p} for r, p in v.pieces.items()}
    return run_spmd(v.grid, program, mode=mode, latency=latency, local=local, phase=phase)


def alltoall(v: DistVector, dest, *, mode="seq", latency="flat", phase="alltoall"):
    """Route every vector entry to rank id ``dest(entries)``."""

    proto = next(iter(v.pieces.values()), np.empty(0, INDEX))
    blank = np.empty((0,) + proto.shape[1:], dtype=proto.dtype)

    def program(ctx):
        return (yield from ctx.alltoall(ctx.local.get("items", blank), dest))

    local = {r: {"items": p} for r, p in v.pieces.items()}
    return run_spmd(v.grid, program, mode=mode, latency=latency, local=local, phase=phase)
