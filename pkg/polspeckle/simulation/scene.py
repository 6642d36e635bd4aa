"""
Synthetic Polarimetric Scenes
=============================
Renders a width x height scene made of homogeneous rectangular regions,
each with its own coherency matrix, into the intensity images a two- or
four-image polarimetric camera would record under fully developed speckle.

Pixels are independent. Row y draws from its own substream
(seed, derive_stream_id(ROW_STREAM_SALT, y)) and pixel (x, y) takes the
x-th circular normal pair of that row, so the image depends only on the
seed and the pixel index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from polspeckle.core.errors import ContractViolation, DomainError
from polspeckle.core.polcore import CoherencyMatrix
from polspeckle.simulation.speckle import IntensityRecords, cholesky_factor
from polspeckle.simulation.streams import SamplerConfig, derive_stream_id, standard_circular_normals
from polspeckle.utils.logging import get_logger

logger = get_logger(__name__)

# keeps row streams apart from campaign streams under the same seed
ROW_STREAM_SALT = 0x524F57


@dataclass(frozen=True)
class Region:
    """Half-open pixel rectangle [x0, x1) x [y0, y1) with its matrix."""
    x0: int
    y0: int
    x1: int
    y1: int
    gamma: CoherencyMatrix
    name: str = ""


@dataclass(frozen=True)
class SceneSpec:
    """
    Scene description. Regions are painted in order over the background,
    so a later region overwrites an earlier one where they overlap.
    """
    width: int
    height: int
    background: CoherencyMatrix
    regions: Tuple[Region, ...] = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise DomainError(f"scene must be at least 1x1, got {self.width}x{self.height}")
        object.__setattr__(self, "regions", tuple(self.regions))
        for region in self.regions:
            if not (0 <= region.x0 < region.x1 <= self.width and 0 <= region.y0 < region.y1 <= self.height):
                raise DomainError(
                    f"region '{region.name}' [{region.x0},{region.x1})x[{region.y0},{region.y1}) "
                    f"is empty or outside the {self.width}x{self.height} scene"
                )

    def matrices(self) -> Tuple[CoherencyMatrix, ...]:
        """Background first, then regions in painter's order (label order)."""
        return (self.background,) + tuple(r.gamma for r in self.regions)


@dataclass(frozen=True)
class ImagePair:
    """I1/I2 images indexed [y, x]; ``cross`` only for four-image acquisition."""
    i1: np.ndarray
    i2: np.ndarray
    cross: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.i1.ndim != 2 or self.i1.shape != self.i2.shape:
            raise ContractViolation(f"image shapes differ: {self.i1.shape} vs {self.i2.shape}")
        if self.cross is not None and self.cross.shape != self.i1.shape:
            raise ContractViolation(f"cross image shape {self.cross.shape} != {self.i1.shape}")

    @property
    def height(self) -> int:
        return self.i1.shape[0]

    @property
    def width(self) -> int:
        return self.i1.shape[1]

    def records(self, rows: slice = slice(None), cols: slice = slice(None)) -> IntensityRecords:
        """Pixels of a rectangle, flattened in row-major order."""
        cross = None if self.cross is None else self.cross[rows, cols].ravel()
        return IntensityRecords(
            i1=self.i1[rows, cols].ravel(),
            i2=self.i2[rows, cols].ravel(),
            cross=cross,
        )


def region_labels(scene: SceneSpec) -> np.ndarray:
    """Label grid: 0 for background, k for the k-th region (1-based)."""
    labels = np.zeros((scene.height, scene.width), dtype=np.int64)
    for k, region in enumerate(scene.regions, start=1):
        labels[region.y0:region.y1, region.x0:region.x1] = k
    return labels


def render_scene(scene: SceneSpec, keep_cross: bool = False) -> ImagePair:
    """Draw one Jones vector per pixel from its region's coherency matrix."""
    factors = np.stack([cholesky_factor(g) for g in scene.matrices()])
    labels = region_labels(scene)
    jones = np.empty((scene.height, scene.width, 2), dtype=np.complex128)
    for y in range(scene.height):
        cfg = SamplerConfig(seed=scene.seed, stream_id=derive_stream_id(ROW_STREAM_SALT, y))
        z = standard_circular_normals(cfg.generator(), scene.width)
        jones[y] = np.einsum("xij,xj->xi", factors[labels[y]], z)

    ax = jones[..., 0]
    ay = jones[..., 1]
    pair = ImagePair(
        i1=ax.real ** 2 + ax.imag ** 2,
        i2=ay.real ** 2 + ay.imag ** 2,
        cross=ax * np.conj(ay) if keep_cross else None,
    )
    logger.info(
        f"SceneRender: {scene.width}x{scene.height}, {len(scene.regions)} region(s), "
        f"seed={scene.seed}, cross={'yes' if keep_cross else 'no'}"
    )
    return pair
