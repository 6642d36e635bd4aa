"""
Reproducible random streams.

Every variate is a function of (seed, stream_id, draw index):

- the bit generator is numpy's counter-based ``Philox`` keyed by
  ``SeedSequence(entropy=seed, spawn_key=(stream_id,))``
- normals come from ``Generator.standard_normal`` (ziggurat method), which
  numpy keeps stable for a given bit-generator state

so a substream never depends on worker count, scheduling or platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from polspeckle.core.errors import DomainError

MASK64 = (1 << 64) - 1

# splitmix64 constants
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_MUL_1 = 0xBF58476D1CE4E5B9
_MIX_MUL_2 = 0x94D049BB133111EB


def _check_u64(value: int, name: str) -> int:
    v = int(value)
    if v < 0 or v > MASK64:
        raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value}")
    return v


def splitmix64(x: int) -> int:
    """One splitmix64 finalisation step on a 64-bit integer."""
    z = (x + _GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _MIX_MUL_1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_MUL_2) & MASK64
    return z ^ (z >> 31)


def derive_stream_id(*indices: int) -> int:
    """
    Fold a tuple of non-negative indices into a 64-bit stream id.

    ``derive_stream_id(m, n, r)`` names realization r of grid cell (m, n);
    adding grid cells never changes the id of an existing one.
    """
    h = splitmix64(len(indices))
    for index in indices:
        h = splitmix64(h ^ _check_u64(index, "stream index"))
    return h


@dataclass(frozen=True)
class SamplerConfig:
    """Seed and substream selector of one sampler."""
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", _check_u64(self.seed, "seed"))
        object.__setattr__(self, "stream_id", _check_u64(self.stream_id, "stream_id"))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))

    def substream(self, *indices: int) -> "SamplerConfig":
        return SamplerConfig(seed=self.seed, stream_id=derive_stream_id(*indices))


def standard_circular_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Draw an (n, 2) array of independent standard circular complex normals.

    Real and imaginary parts each have variance 1/2, so <|z|^2> = 1 and
    <z^2> = 0. Draw order per sample: re(z1), im(z1), re(z2), im(z2).
    """
    raw = rng.standard_normal((n, 4)) * np.sqrt(0.5)
    return raw[:, 0::2] + 1j * raw[:, 1::2]
