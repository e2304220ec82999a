"""Matrix Market coordinate files: 1-based on disk, 0-based in memory.

Real values are written with ``repr`` so a write/read round trip is exact.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError
from .formats import INDEX, CscMatrix, as_csc, csc_from_coo
from .semiring import BOOL_OR_AND, INT_PLUS_TIMES, PLUS_TIMES, Semiring

_FIELDS = {"real": PLUS_TIMES, "double": PLUS_TIMES, "integer": INT_PLUS_TIMES,
           "pattern": BOOL_OR_AND}
_SYMMETRIES = ("general", "symmetric")


def _field_for(sr: Semiring) -> str:
    if sr.dtype == np.bool_:
        return "pattern"
    if np.issubdtype(sr.dtype, np.integer):
        return "integer"
    return "real"


def write_matrix_market(a, path, sr: Semiring = PLUS_TIMES, comment: Optional[str] = None) -> None:
    a = as_csc(a)
    field = _field_for(sr)
    r, c, v = a.coo()
    lines = [f"%%MatrixMarket matrix coordinate {field} general"]
    if comment:
        lines += [f"% {line}" for line in comment.splitlines()]
    lines.append(f"{a.rows} {a.cols} {a.nnz}")
    if field == "pattern":
        lines += [f"{i + 1} {j + 1}" for i, j in zip(r.tolist(), c.tolist())]
    elif field == "integer":
        lines += [f"{i + 1} {j + 1} {x}" for i, j, x in zip(r.tolist(), c.tolist(), v.tolist())]
    else:
        lines += [f"{i + 1} {j + 1} {x!r}" for i, j, x in
                  zip(r.tolist(), c.tolist(), v.astype(float).tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_market(path, sr: Optional[Semiring] = None) -> CscMatrix:
    """Parse a coordinate file; duplicates fold with ``sr.add``.  Without
    ``sr`` the semiring follows the file's field (real, integer, pattern)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix coordinate <field> <symmetry>'", 1)
    fmt, field, sym = (h.lower() for h in head[2:])
    if fmt != "coordinate":
        raise ParseError(f"only coordinate format is supported, got {fmt!r}", 1)
    if field not in _FIELDS:
        raise ParseError(f"unsupported field {field!r}", 1)
    if sym not in _SYMMETRIES:
        raise ParseError(f"unsupported symmetry {sym!r}", 1)
    sr = sr or _FIELDS[field]

    body = [(n, ln) for n, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", len(lines))
    size_no, size_line = body[0]
    try:
        rows, cols, nnz = (int(x) for x in size_line.split())
    except ValueError:
        raise ParseError(f"bad size line {size_line!r}", size_no) from None
    if min(rows, cols, nnz) < 0:
        raise ParseError("negative size", size_no)
    entries = body[1:]
    if len(entries) != nnz:
        where = entries[nnz][0] if len(entries) > nnz else len(lines)
        raise ParseError(f"expected {nnz} entries, found {len(entries)}", where)

    width = 2 if field == "pattern" else 3
    ri = np.empty(nnz, dtype=INDEX)
    ci = np.empty(nnz, dtype=INDEX)
    vals = []
    for t, (no, ln) in enumerate(entries):
        parts = ln.split()
        if len(parts) != width:
            raise ParseError(f"expected {width} fields, got {len(parts)}", no)
        try:
            i, j = int(parts[0]), int(parts[1])
            x = True if field == "pattern" else (int(parts[2]) if field == "integer"
                                                   else float(parts[2]))
        except ValueError:
            raise ParseError(f"bad entry {ln.strip()!r}", no) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise ParseError(f"entry ({i}, {j}) outside {rows}x{cols}", no)
        ri[t], ci[t] = i - 1, j - 1
        vals.append(x)
    v = np.array(vals, dtype=sr.dtype) if vals else np.empty(0, dtype=sr.dtype)
    if field == "pattern":
        v = np.full(nnz, sr.one, dtype=sr.dtype)
    if sym == "symmetric":
        off = ri != ci
        ri, ci, v = (np.concatenate((ri, ci[off])), np.concatenate((ci, ri[off])),
                     np.concatenate((v, v[off])))
    return csc_from_coo(ri, ci, v, rows, cols, sr)
