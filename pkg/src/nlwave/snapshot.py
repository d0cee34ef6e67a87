"""Binary state snapshots (NLWV format).

Layout, all little-endian:

    bytes 0..3    magic "NLWV"
    uint32        format version (currently 1)
    uint32        n, uint32 M, uint32 N
    float64       L
    float64       t
    float64 x 2 * M^n * N   u values, complex interleaved (re, im),
                            row-major over the grid, fiber index fastest
    float64 x 2 * M^n * N   v = u_t values, same layout

Values are stored in physical representation.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Field, Grid, State, to_physical

MAGIC = b"NLWV"
VERSION = 1

_HEADER = struct.Struct("<4sIIIIdd")


class SnapshotError(ValueError):
    """Malformed, truncated, or version-mismatched snapshot data."""


def write_snapshot(path: str | Path, state: State) -> None:
    """Write a State to path; fields are converted to physical representation."""
    g = state.grid
    u = to_physical(state.u).values
    v = to_physical(state.v).values
    header = _HEADER.pack(MAGIC, VERSION, g.n, g.M, g.N, g.L, state.t)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(u, dtype=np.complex128).tobytes())
        fh.write(np.ascontiguousarray(v, dtype=np.complex128).tobytes())


def read_snapshot(path: str | Path) -> State:
    """Read a State; raises SnapshotError naming the byte offset on truncation."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError(
            f"truncated snapshot: header needs {_HEADER.size} bytes, file has {len(raw)} (offset {len(raw)})"
        )
    magic, version, n, M, N, L, t = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}, expected {VERSION}")
    grid = Grid(n=n, L=L, M=M, N=N)
    count = M**n * N
    block = 16 * count
    expected = _HEADER.size + 2 * block
    if len(raw) != expected:
        raise SnapshotError(
            f"truncated snapshot: expected {expected} bytes, file has {len(raw)} (offset {len(raw)})"
        )
    u = np.frombuffer(raw, dtype="<c16", count=count, offset=_HEADER.size)
    v = np.frombuffer(raw, dtype="<c16", count=count, offset=_HEADER.size + block)
    uf = Field(grid, u.reshape(grid.shape).copy(), t=t, real=bool(np.abs(u.imag).max() == 0.0))
    vf = Field(grid, v.reshape(grid.shape).copy(), t=t, real=bool(np.abs(v.imag).max() == 0.0))
    return State(uf, vf)
