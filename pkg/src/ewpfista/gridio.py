"""Binary grid files.

Layout (little-endian)::

    magic   4 bytes   b"EWP1"
    kind    u8        0=image, 1=kspace, 2=mask, 3=real/edge map
    height  u32
    width   u32
    payload kinds 0/1: height*width (f64 real, f64 imag) pairs
            kind 2:    height*width bytes, each 0 or 1
            kind 3:    height*width f64 values

Masks are stored without their generator metadata; on reading, the kind is
inferred from the pattern (all ones -> full, whole columns -> cartesian1d,
otherwise random2d) and ``nominal_rate`` is set to the achieved rate.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .core import (
    ComplexImage,
    EdgeWeightMap,
    GridError,
    KSpaceGrid,
    RealGrid,
    SamplingMask,
)

__all__ = [
    "MAGIC",
    "GridFormatError",
    "BadMagicError",
    "TruncatedPayloadError",
    "DimensionOverflowError",
    "NonBinaryMaskError",
    "KindMismatchError",
    "EdgeRangeError",
    "read_grid",
    "write_grid",
    "encode_grid",
    "decode_grid",
]

MAGIC = b"EWP1"
_HEADER = struct.Struct("<4sBII")
# cap on cells per grid; keeps payload sizes well inside addressable memory
MAX_CELLS = 1 << 28

_KIND_CODES = {"image": 0, "kspace": 1, "mask": 2, "edgemap": 3, "real": 3}
_CELL_BYTES = {0: 16, 1: 16, 2: 1, 3: 8}


class GridFormatError(GridError):
    """Base class for malformed grid files."""


class BadMagicError(GridFormatError):
    pass


class TruncatedPayloadError(GridFormatError):
    pass


class DimensionOverflowError(GridFormatError):
    pass


class NonBinaryMaskError(GridFormatError):
    pass


class KindMismatchError(GridFormatError):
    pass


class EdgeRangeError(GridFormatError):
    pass


def _kind_of(grid) -> int:
    # order matters: EdgeWeightMap is a RealGrid
    if isinstance(grid, ComplexImage):
        return 0
    if isinstance(grid, KSpaceGrid):
        return 1
    if isinstance(grid, SamplingMask):
        return 2
    if isinstance(grid, RealGrid):
        return 3
    raise TypeError(f"cannot serialize {type(grid).__name__}")


def encode_grid(grid) -> bytes:
    """Serialize a typed grid to bytes."""
    kind = _kind_of(grid)
    h, w = grid.shape
    if h < 1 or w < 1:
        raise GridError("refusing to encode an empty grid")
    header = _HEADER.pack(MAGIC, kind, h, w)
    if kind in (0, 1):
        payload = grid.data.astype("<c16").tobytes()
    elif kind == 2:
        payload = grid.data.astype(np.uint8).tobytes()
    else:
        payload = grid.data.astype("<f8").tobytes()
    return header + payload


def _infer_mask_kind(cells: np.ndarray) -> str:
    if cells.all():
        return "full"
    cols = cells.any(axis=0)
    if np.array_equal(cells, np.broadcast_to(cols, cells.shape)):
        return "cartesian1d"
    return "random2d"


def decode_grid(buf: bytes, expected_kind: str):
    """Parse bytes produced by :func:`encode_grid`."""
    if expected_kind not in _KIND_CODES:
        raise ValueError(f"unknown grid kind {expected_kind!r}")
    if len(buf) < _HEADER.size:
        if buf[:4] != MAGIC[: len(buf[:4])]:
            raise BadMagicError("bad magic")
        raise TruncatedPayloadError(f"truncated header: {len(buf)} bytes")
    magic, kind, h, w = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if kind not in _CELL_BYTES:
        raise GridFormatError(f"unknown kind byte {kind}")
    if kind != _KIND_CODES[expected_kind]:
        raise KindMismatchError(f"file holds kind {kind}, expected {expected_kind}")
    if h < 1 or w < 1:
        raise GridFormatError(f"non-positive dimensions {h}x{w}")
    cells = h * w
    if cells > MAX_CELLS:
        raise DimensionOverflowError(f"{h}x{w} exceeds {MAX_CELLS} cells")
    need = cells * _CELL_BYTES[kind]
    payload = memoryview(buf)[_HEADER.size:]
    if len(payload) < need:
        raise TruncatedPayloadError(f"payload has {len(payload)} bytes, need {need}")
    if len(payload) > need:
        raise GridFormatError(f"{len(payload) - need} trailing bytes after payload")

    if kind in (0, 1):
        data = np.frombuffer(payload, dtype="<c16").reshape(h, w)
        return (ComplexImage if kind == 0 else KSpaceGrid)(data)
    if kind == 2:
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
        if raw.max() > 1:
            raise NonBinaryMaskError(f"non-binary mask cell (value {int(raw.max())})")
        cells_ = raw.astype(bool)
        return SamplingMask(cells_, kind=_infer_mask_kind(cells_))
    data = np.frombuffer(payload, dtype="<f8").reshape(h, w)
    if expected_kind == "edgemap":
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise EdgeRangeError("edge weights outside [0, 1]")
        return EdgeWeightMap(data)
    return RealGrid(data)


def read_grid(path, expected_kind: str):
    """Read a grid file, checking that it holds ``expected_kind``.

    ``expected_kind`` is one of ``image``, ``kspace``, ``mask``, ``edgemap``
    or ``real`` (kind 3 without the [0, 1] range check).
    """
    with open(path, "rb") as fh:
        return decode_grid(fh.read(), expected_kind)


def write_grid(grid, path) -> None:
    """Write ``grid`` to ``path``; bytes depend only on the grid contents."""
    buf = encode_grid(grid)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(buf)
    os.replace(tmp, path)
