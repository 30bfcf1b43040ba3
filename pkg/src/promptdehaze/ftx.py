"""FTX: a minimal binary tensor file for exchanging encoder features.

Layout (all integers little-endian):

    file   := magic record+
    magic  := b"FTX1"
    record := version:u32 (= 1)
              dtype:u32   (= 1, float32)
              rank:u32    (1..8)
              dims:u64 x rank   (each >= 1)
              payload     (prod(dims) float32 values, C order /
                           channel-major for feature maps)

One record per pyramid level, finest first.  The reader rejects unknown
versions and dtypes, zero dims, and truncation, always naming the byte
offset of the problem so export scripts can be debugged from the message.
"""

import struct
from pathlib import Path

import numpy as np

__all__ = ["FtxError", "MAGIC", "write_ftx", "read_ftx"]

MAGIC = b"FTX1"
VERSION = 1
DTYPE_F32 = 1
MAX_RANK = 8

_HEADER = struct.Struct("<III")


class FtxError(ValueError):
    """Malformed FTX data; message includes the byte offset."""


def write_ftx(path, tensors) -> None:
    """Write tensors as float32 records; rejects empty or non-finite data."""
    tensors = list(tensors)
    if not tensors:
        raise ValueError("write_ftx: need at least one tensor")
    blobs = [MAGIC]
    for i, t in enumerate(tensors):
        arr = np.ascontiguousarray(t, dtype="<f4")
        if arr.ndim < 1 or arr.ndim > MAX_RANK:
            raise ValueError(f"tensor {i}: rank {arr.ndim} outside 1..{MAX_RANK}")
        if arr.size == 0:
            raise ValueError(f"tensor {i}: has an empty dimension {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"tensor {i}: contains non-finite values")
        blobs.append(_HEADER.pack(VERSION, DTYPE_F32, arr.ndim))
        blobs.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        blobs.append(arr.tobytes(order="C"))
    Path(path).write_bytes(b"".join(blobs))


def read_ftx(path):
    """Read all records from an FTX file; returns a list of float32 arrays."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise FtxError(f"byte 0: missing magic {MAGIC!r}")
    offset = len(MAGIC)
    tensors = []
    while offset < len(data):
        if offset + _HEADER.size > len(data):
            raise FtxError(f"byte {offset}: truncated record header")
        version, dtype, rank = _HEADER.unpack_from(data, offset)
        if version != VERSION:
            raise FtxError(f"byte {offset}: unsupported version {version}")
        if dtype != DTYPE_F32:
            raise FtxError(f"byte {offset + 4}: unsupported dtype tag {dtype}")
        if rank < 1 or rank > MAX_RANK:
            raise FtxError(f"byte {offset + 8}: rank {rank} outside 1..{MAX_RANK}")
        offset += _HEADER.size
        dims_size = 8 * rank
        if offset + dims_size > len(data):
            raise FtxError(f"byte {offset}: truncated dims")
        dims = struct.unpack_from(f"<{rank}Q", data, offset)
        if any(d == 0 for d in dims):
            raise FtxError(f"byte {offset}: zero dimension in {dims}")
        offset += dims_size
        count = 1
        for d in dims:
            count *= d
        payload_size = 4 * count
        if offset + payload_size > len(data):
            raise FtxError(
                f"byte {offset}: truncated payload, need {payload_size} bytes, "
                f"have {len(data) - offset}"
            )
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        tensors.append(arr.reshape(dims).copy())
        offset += payload_size
    if not tensors:
        raise FtxError(f"byte {offset}: file contains no records")
    return tensors
