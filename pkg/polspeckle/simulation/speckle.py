"""
Fully Developed Speckle Sampler
===============================
Draws Jones vectors A = (A_X, A_Y) from the circular complex Gaussian law
with a prescribed coherency matrix Gamma, and converts them into the
intensity records seen by a polarimetric camera:

    I1 = |A_X|^2       (parallel analyser)
    I2 = |A_Y|^2       (orthogonal analyser)
    cross = A_X A_Y*   (only measured by a four-image system)

Sampling colours standard circular normals with the Cholesky factor L of
Gamma (A = L z), which also covers rank-1 (fully polarized) matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Tuple, Union

import numpy as np

from polspeckle.core.errors import ContractViolation, DomainError
from polspeckle.core.polcore import CoherencyMatrix
from polspeckle.simulation.streams import SamplerConfig, standard_circular_normals
from polspeckle.utils.logging import get_logger

logger = get_logger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class JonesEnsemble:
    """N Jones vectors, stored as an (N, 2) complex array [A_X, A_Y]."""
    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.samples, dtype=np.complex128)
        if s.ndim != 2 or s.shape[1] != 2:
            raise ContractViolation(f"Jones samples must have shape (N, 2), got {s.shape}")
        if s.shape[0] < 1:
            raise DomainError("a Jones ensemble needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise DomainError("Jones samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def ax(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def ay(self) -> np.ndarray:
        return self.samples[:, 1]


@dataclass(frozen=True)
class IntensityRecord:
    """Measurements of one sample (pixel)."""
    i1: float
    i2: float
    cross: Optional[complex] = None


@dataclass(frozen=True)
class IntensityRecords:
    """
    Intensity records of N samples in struct-of-arrays form.

    ``cross`` is None when only the two intensity images were acquired.
    """
    i1: np.ndarray
    i2: np.ndarray
    cross: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        i1 = np.array(self.i1, dtype=np.float64).ravel()
        i2 = np.array(self.i2, dtype=np.float64).ravel()
        if i1.shape != i2.shape:
            raise ContractViolation(f"I1 and I2 lengths differ: {i1.size} vs {i2.size}")
        if np.any(i1 < 0) or np.any(i2 < 0):
            raise DomainError("intensities must be nonnegative")
        object.__setattr__(self, "i1", _frozen(i1))
        object.__setattr__(self, "i2", _frozen(i2))
        if self.cross is not None:
            cross = np.array(self.cross, dtype=np.complex128).ravel()
            if cross.shape != i1.shape:
                raise ContractViolation(
                    f"cross length {cross.size} does not match {i1.size} intensity samples"
                )
            object.__setattr__(self, "cross", _frozen(cross))

    @classmethod
    def from_records(cls, records: Iterable[Union[IntensityRecord, Tuple]]) -> "IntensityRecords":
        """
        Build from a sequence of IntensityRecord or (i1, i2[, cross]) tuples.

        Cross terms are kept only if every record carries one.
        """
        rows = [r if isinstance(r, IntensityRecord) else IntensityRecord(*r) for r in records]
        i1 = [r.i1 for r in rows]
        i2 = [r.i2 for r in rows]
        has_cross = bool(rows) and all(r.cross is not None for r in rows)
        cross = [r.cross for r in rows] if has_cross else None
        return cls(i1=i1, i2=i2, cross=cross)

    def __len__(self) -> int:
        return self.i1.size

    def __getitem__(self, index: int) -> IntensityRecord:
        cross = None if self.cross is None else complex(self.cross[index])
        return IntensityRecord(i1=float(self.i1[index]), i2=float(self.i2[index]), cross=cross)

    def __iter__(self) -> Iterator[IntensityRecord]:
        for k in range(len(self)):
            yield self[k]

    @property
    def has_cross(self) -> bool:
        return self.cross is not None

    def drop_cross(self) -> "IntensityRecords":
        """Two-image view of the same samples."""
        if self.cross is None:
            return self
        return IntensityRecords(i1=self.i1, i2=self.i2)

    def scaled(self, k: float) -> "IntensityRecords":
        cross = None if self.cross is None else self.cross * k
        return IntensityRecords(i1=self.i1 * k, i2=self.i2 * k, cross=cross)


# ============================================================================
# SAMPLING
# ============================================================================

def cholesky_factor(gamma: CoherencyMatrix) -> np.ndarray:
    """
    Lower-triangular L with Gamma = L L^dagger, L11 >= 0, L22 >= 0.

    Rank-1 matrices get L22 = 0 instead of being rejected. L22 comes
    from the clamped determinant of CoherencyMatrix.
    """
    l11 = math.sqrt(gamma.a1)
    if l11 > 0.0:
        l21 = gamma.a2.conjugate() / l11
        l22 = math.sqrt(gamma.det / gamma.a1)
    else:
        # a1 = 0 leaves only a negligible a2 inside the tolerance band
        l21 = 0j
        l22 = math.sqrt(gamma.a4)
    return np.array([[l11, 0.0], [l21, l22]], dtype=np.complex128)


def sample_jones(gamma: CoherencyMatrix, n: int, cfg: SamplerConfig) -> JonesEnsemble:
    """Draw n i.i.d. circular Gaussian Jones vectors with covariance Gamma."""
    if n < 1:
        raise DomainError(f"sample count must be >= 1, got {n}")
    factor = cholesky_factor(gamma)
    z = standard_circular_normals(cfg.generator(), n)
    # row form of A_i = L z_i
    samples = z @ factor.T
    logger.debug(f"Sampler: drew {n} Jones vectors (seed={cfg.seed}, stream={cfg.stream_id:#x})")
    return JonesEnsemble(samples=samples)


def to_intensity_records(ensemble: JonesEnsemble, keep_cross: bool = False) -> IntensityRecords:
    """I1 = |A_X|^2, I2 = |A_Y|^2 and, for four-image acquisition, A_X A_Y*."""
    ax = ensemble.ax
    ay = ensemble.ay
    i1 = ax.real ** 2 + ax.imag ** 2
    i2 = ay.real ** 2 + ay.imag ** 2
    cross = ax * np.conj(ay) if keep_cross else None
    return IntensityRecords(i1=i1, i2=i2, cross=cross)


# ============================================================================
# DIAGNOSTICS
# ============================================================================

def empirical_coherency(ensemble: JonesEnsemble) -> CoherencyMatrix:
    """Sample coherency matrix (1/N normalisation)."""
    ax = ensemble.ax
    ay = ensemble.ay
    return CoherencyMatrix(
        a1=float(np.mean(np.abs(ax) ** 2)),
        a4=float(np.mean(np.abs(ay) ** 2)),
        a2=complex(np.mean(ax * np.conj(ay))),
    )


def pseudo_covariance(ensemble: JonesEnsemble) -> Tuple[complex, complex]:
    """(<A_X^2>, <A_Y^2>); both vanish for circular Gaussian fields."""
    return complex(np.mean(ensemble.ax ** 2)), complex(np.mean(ensemble.ay ** 2))

