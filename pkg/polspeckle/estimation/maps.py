"""
Per-pixel and sliding-window polarization maps.

osci_map      -- per-pixel contrast (I1 - I2)/(I1 + I2), dark pixels masked
estimate_map  -- P^2 estimate over a window centred on every pixel; windows
                 are clipped at the borders (never padded) and the actual
                 sample count of each window is kept in ``n_map``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from polspeckle.core.errors import ContractViolation, DomainError, PolarimetryError
from polspeckle.estimation.estimators import EstimatorKind, estimate_p2
from polspeckle.simulation.scene import ImagePair
from polspeckle.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_WINDOW = 31


@dataclass(frozen=True)
class OsciMap:
    values: np.ndarray
    mask: np.ndarray  # True where I1 + I2 = 0


@dataclass(frozen=True)
class EstimateMap:
    values: np.ndarray  # NaN where the window could not be estimated
    n_map: np.ndarray
    kind: EstimatorKind
    window: int


def osci_map(pair: ImagePair) -> OsciMap:
    total = pair.i1 + pair.i2
    mask = total <= 0
    safe_total = np.where(mask, 1.0, total)
    values = np.where(mask, 0.0, (pair.i1 - pair.i2) / safe_total)
    if np.any(mask):
        logger.warning(f"OsciMap: {int(mask.sum())} zero-intensity pixel(s) masked")
    return OsciMap(values=values, mask=mask)


def estimate_map(pair: ImagePair, window: int = DEFAULT_WINDOW,
                 kind: EstimatorKind = EstimatorKind.CORRELATED_PAIR) -> EstimateMap:
    if window < 3 or window % 2 == 0:
        raise DomainError(f"window must be an odd size >= 3, got {window}")
    if window > pair.width and window > pair.height:
        raise DomainError(
            f"window {window} is larger than both image dimensions ({pair.width}x{pair.height})"
        )
    if kind.needs_cross and pair.cross is None:
        raise ContractViolation("four-image map needs the cross image")
    source = pair if kind.needs_cross else ImagePair(i1=pair.i1, i2=pair.i2)

    half = window // 2
    values = np.full(pair.i1.shape, np.nan)
    n_map = np.zeros(pair.i1.shape, dtype=np.int64)
    failed = 0
    for y in range(pair.height):
        rows = slice(max(0, y - half), min(pair.height, y + half + 1))
        for x in range(pair.width):
            cols = slice(max(0, x - half), min(pair.width, x + half + 1))
            records = source.records(rows, cols)
            n_map[y, x] = len(records)
            try:
                values[y, x] = estimate_p2(records, kind).p2_hat
            except PolarimetryError:
                failed += 1
    if failed:
        logger.warning(f"EstimateMap: {failed} window(s) could not be estimated ({kind.value})")
    logger.debug(f"EstimateMap: {kind.value} window={window} on {pair.width}x{pair.height}")
    return EstimateMap(values=values, n_map=n_map, kind=kind, window=window)
