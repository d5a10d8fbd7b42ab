"""Binary ensemble snapshots.

Format "SLW1": a little-endian header of magic + four 64-bit fields
(dim, points per axis, box length, oscillator count, sample time; the
integers signed), then N * points^dim complex128 samples, row-major,
oscillator-major. Writing the same state twice produces identical bytes,
which the reproducibility checks lean on.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import EnsembleState, GridSpec
from .errors import ConfigurationError

__all__ = ["write_snapshot", "read_snapshot", "SNAPSHOT_MAGIC"]

SNAPSHOT_MAGIC = b"SLW1"
_HEADER = struct.Struct("<4sqqdqd")


def write_snapshot(path, state: EnsembleState) -> None:
    grid = state.grid
    payload = np.ascontiguousarray(state.psi, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                SNAPSHOT_MAGIC,
                grid.dim,
                grid.points,
                grid.length,
                state.n_oscillators,
                state.time,
            )
        )
        fh.write(payload.tobytes())


def read_snapshot(path) -> EnsembleState:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ConfigurationError(f"{path}: truncated snapshot header")
        magic, dim, points, length, n, time = _HEADER.unpack(header)
        if magic != SNAPSHOT_MAGIC:
            raise ConfigurationError(f"{path}: not a snapshot file (magic {magic!r})")
        grid = GridSpec(dim=int(dim), points=int(points), length=float(length))
        count = int(n) * grid.size
        raw = fh.read()
    expected = count * 16
    if len(raw) != expected:
        raise ConfigurationError(
            f"{path}: payload holds {len(raw)} bytes, header promises {expected}"
        )
    psi = np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape((int(n),) + grid.shape)
    return EnsembleState(grid, psi, float(time))
