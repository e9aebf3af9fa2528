"""Binary tensor records.

Layout (little-endian)::

    b"TENS" | u32 ndim | u32 dim * ndim | f64 payload (row-major)
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

MAGIC = b"TENS"


class CorruptTensor(ValueError):
    pass


def write_tensor(fh: BinaryIO, array: np.ndarray) -> None:
    arr = np.asarray(array, dtype="<f8")
    fh.write(MAGIC)
    fh.write(struct.pack("<I", arr.ndim))
    fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    fh.write(arr.tobytes(order="C"))


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise CorruptTensor(f"truncated tensor record (wanted {n} bytes, got {len(buf)})")
    return buf


def read_tensor(fh: BinaryIO) -> np.ndarray:
    if _read_exact(fh, 4) != MAGIC:
        raise CorruptTensor("bad tensor magic")
    (ndim,) = struct.unpack("<I", _read_exact(fh, 4))
    shape = struct.unpack(f"<{ndim}I", _read_exact(fh, 4 * ndim))
    count = int(np.prod(shape)) if ndim else 1
    data = np.frombuffer(_read_exact(fh, 8 * count), dtype="<f8")
    return data.reshape(shape).astype(np.float64)
