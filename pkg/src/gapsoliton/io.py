"""
Field persistence.

GSF1 layout (all little-endian):

    offset 0        4 bytes   b"GSF1"
    offset 4        int64     dim
    offset 12       int64     K
    offset 20       int64[d]  n_1 .. n_d
                    float64[d] L_1 .. L_d
                    float64[K*M] values, component-major, each component in C order
"""

from __future__ import annotations

import csv
import io as _io
import struct
from pathlib import Path

import numpy as np

from .errors import FieldFormatError, GridMismatch
from .grid import TorusGrid, VectorField, make_grid

MAGIC = b"GSF1"
_I8 = struct.Struct("<q")
_F8 = struct.Struct("<d")


def encode_field(u: VectorField) -> bytes:
    g = u.grid
    buf = bytearray(MAGIC)
    buf += _I8.pack(g.dim) + _I8.pack(u.components)
    for n in g.points:
        buf += _I8.pack(n)
    for L in g.box_lengths:
        buf += _F8.pack(L)
    buf += np.ascontiguousarray(u.values, dtype="<f8").tobytes()
    return bytes(buf)


def save_field(u: VectorField, path) -> None:
    Path(path).write_bytes(encode_field(u))


def _read(data: bytes, offset: int, st: struct.Struct, what: str):
    end = offset + st.size
    if end > len(data):
        raise FieldFormatError(f"truncated while reading {what}: need {st.size} bytes at offset {offset}, file has {len(data)}", offset=offset)
    return st.unpack_from(data, offset)[0], end


def decode_field(data: bytes) -> VectorField:
    if len(data) < 4:
        raise FieldFormatError(f"truncated header at offset {len(data)}", offset=len(data))
    if data[:4] != MAGIC:
        raise FieldFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}", offset=0)
    off = 4
    dim, off = _read(data, off, _I8, "dim")
    if dim not in (1, 2):
        raise FieldFormatError(f"unsupported dim {dim} in header", offset=4)
    K, off = _read(data, off, _I8, "component count")
    if K < 1:
        raise FieldFormatError(f"invalid component count {K}", offset=12)
    points, lengths = [], []
    for d in range(dim):
        n, off = _read(data, off, _I8, f"n_{d + 1}")
        points.append(n)
    for d in range(dim):
        L, off = _read(data, off, _F8, f"L_{d + 1}")
        lengths.append(L)
    try:
        grid = make_grid(dim, lengths, points)
    except ValueError as exc:
        raise FieldFormatError(f"invalid grid in header: {exc}", offset=20) from exc
    need = K * grid.size * 8
    have = len(data) - off
    if have < need:
        raise FieldFormatError(
            f"truncated payload: expected {need} bytes of values from offset {off}, found {have} (ends at offset {len(data)})",
            offset=len(data),
        )
    if have > need:
        raise FieldFormatError(f"{have - need} trailing bytes after payload", offset=off + need)
    values = np.frombuffer(data, dtype="<f8", count=K * grid.size, offset=off).reshape(K, grid.size)
    return VectorField(grid, values.astype(np.float64))


def load_field(path, grid: TorusGrid | None = None, components: int | None = None) -> VectorField:
    """Read a GSF1 file; optionally insist on a grid and component count."""
    u = decode_field(Path(path).read_bytes())
    if components is not None and u.components != components:
        raise GridMismatch(f"field file has K={u.components}, expected K={components}")
    if grid is not None and (u.grid.dim, u.grid.points, u.grid.box_lengths) != (grid.dim, grid.points, grid.box_lengths):
        raise GridMismatch(f"field grid {u.grid.points}/{u.grid.box_lengths} differs from {grid.points}/{grid.box_lengths}")
    return u


def field_csv(u: VectorField) -> str:
    """Node coordinates then one column per component."""
    g = u.grid
    coords = [c.ravel() for c in g.coordinates()]
    out = _io.StringIO()
    wr = csv.writer(out, lineterminator="\n")
    wr.writerow(["x", "y"][: g.dim] + [f"u{i + 1}" for i in range(u.components)])
    cols = coords + list(u.values)
    for row in zip(*cols):
        wr.writerow([repr(float(v)) for v in row])
    return out.getvalue()


def save_field_csv(u: VectorField, path) -> None:
    Path(path).write_text(field_csv(u))


def write_rows_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
