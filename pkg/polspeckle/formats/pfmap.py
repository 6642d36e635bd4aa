"""
PFMAP float maps.

    PFMAP <width> <height> <channels>\n
    row-major little-endian float32 samples, channels interleaved per pixel
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence, Union

import numpy as np

from polspeckle.core.errors import ContractViolation, DomainError

MAGIC = "PFMAP"


def encode_pfmap(channels: Sequence[np.ndarray]) -> bytes:
    if not channels:
        raise ContractViolation("PFMAP needs at least one channel")
    shape = np.shape(channels[0])
    if len(shape) != 2 or any(np.shape(c) != shape for c in channels):
        raise ContractViolation("PFMAP channels must be 2-D grids of one shape")
    height, width = shape
    stacked = np.stack([np.asarray(c, dtype=np.float64) for c in channels], axis=-1)
    header = f"{MAGIC} {width} {height} {len(channels)}\n".encode("ascii")
    return header + stacked.astype("<f4").tobytes(order="C")


def decode_pfmap(data: bytes) -> np.ndarray:
    """Return an array of shape (height, width, channels)."""
    end = data.find(b"\n")
    if end < 0:
        raise DomainError("PFMAP header is not terminated")
    fields = data[:end].decode("ascii").split()
    if len(fields) != 4 or fields[0] != MAGIC:
        raise DomainError(f"bad PFMAP header: {data[:end]!r}")
    width, height, channels = (int(f) for f in fields[1:])
    payload = np.frombuffer(data[end + 1:], dtype="<f4")
    if payload.size != width * height * channels:
        raise DomainError(
            f"PFMAP payload has {payload.size} floats, expected {width * height * channels}"
        )
    return payload.reshape(height, width, channels)


def read_pfmap(path: Union[str, Path]) -> np.ndarray:
    return decode_pfmap(Path(path).read_bytes())
