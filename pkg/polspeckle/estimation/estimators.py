"""
P^2 Estimators
==============
Three region-level estimators of the squared degree of polarization. All of
them plug estimates of (a1, a4, |a2|^2) into

    P^2 = 1 - 4 (a1 a4 - |a2|^2) / (a1 + a4)^2

and differ only in how |a2|^2 is obtained:

    FOUR_IMAGE       |(1/N) sum A_X A_Y*|^2               (needs cross terms)
    OSCI             0                                    (pure depolarizer)
    CORRELATED_PAIR  (1/N) sum I1 I2 - <I1><I2>           (two images only)

All averages use 1/N normalisation. Estimates are reported raw: |a2|^2 from
the correlated pair may be negative and P^2 may leave [0, 1] for small N.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, Tuple

import numpy as np

from polspeckle.core.errors import ContractViolation, DomainError
from polspeckle.simulation.speckle import IntensityRecords


class EstimatorKind(str, Enum):
    """Estimator identity; ``label`` is the figure-column suffix."""
    FOUR_IMAGE = "four_image"
    OSCI = "osci"
    CORRELATED_PAIR = "correlated_pair"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def needs_cross(self) -> bool:
        return self is EstimatorKind.FOUR_IMAGE

    @classmethod
    def parse(cls, text: str) -> "EstimatorKind":
        key = text.strip()
        for kind in cls:
            if key.lower() == kind.value or key == kind.label:
                return kind
        raise ValueError(
            f"unknown estimator '{text}' (expected one of "
            f"{', '.join(k.value for k in cls)} or {', '.join(k.label for k in cls)})"
        )


_LABELS = {
    EstimatorKind.FOUR_IMAGE: "A",
    EstimatorKind.OSCI: "OSCI",
    EstimatorKind.CORRELATED_PAIR: "I",
}

ALL_ESTIMATORS: Tuple[EstimatorKind, ...] = (
    EstimatorKind.FOUR_IMAGE,
    EstimatorKind.CORRELATED_PAIR,
    EstimatorKind.OSCI,
)


@dataclass(frozen=True)
class EstimationResult:
    """One P^2 estimate with the intermediate moment estimates."""
    kind: EstimatorKind
    a1_hat: float
    a4_hat: float
    a2_sq_hat: float
    p2_hat: float
    n: int

    def clamped(self) -> float:
        """p2_hat restricted to [0, 1]; for display only."""
        return min(max(self.p2_hat, 0.0), 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "a1_hat": self.a1_hat,
            "a4_hat": self.a4_hat,
            "a2_sq_hat": self.a2_sq_hat,
            "p2_hat": self.p2_hat,
            "n": self.n,
        }


def _require_samples(records: IntensityRecords, minimum: int) -> int:
    n = len(records)
    if n < minimum:
        raise DomainError(f"need at least {minimum} sample(s), got {n}")
    return n


def estimate_diagonal(records: IntensityRecords) -> Tuple[float, float]:
    """(a1_hat, a4_hat) = spatial means of I1 and I2."""
    _require_samples(records, 1)
    return float(np.mean(records.i1)), float(np.mean(records.i2))


def estimate_a2sq_four_image(records: IntensityRecords) -> float:
    """|(1/N) sum A_X A_Y*|^2 from the measured cross terms."""
    _require_samples(records, 1)
    if records.cross is None:
        raise ContractViolation("four-image estimator needs the cross term of every record")
    return float(abs(np.mean(records.cross)) ** 2)


def estimate_a2sq_correlated_pair(records: IntensityRecords) -> float:
    """Centred intensity correlation (1/N) sum I1 I2 - <I1><I2>, sign kept."""
    _require_samples(records, 2)
    i1 = records.i1
    i2 = records.i2
    return float(np.mean(i1 * i2) - np.mean(i1) * np.mean(i2))


def _plug_in(a1: float, a4: float, a2_sq: float) -> float:
    total = a1 + a4
    if total <= 0:
        raise DomainError("dark region: estimated <I1> + <I2> is zero")
    return 1.0 - 4.0 * (a1 * a4 - a2_sq) / (total * total)


def estimate_p2(records: IntensityRecords, kind: EstimatorKind) -> EstimationResult:
    """Estimate P^2 from one region's records with the given estimator."""
    n = len(records)
    if kind is EstimatorKind.CORRELATED_PAIR:
        _require_samples(records, 2)
    a1_hat, a4_hat = estimate_diagonal(records)
    if kind is EstimatorKind.FOUR_IMAGE:
        a2_sq = estimate_a2sq_four_image(records)
    elif kind is EstimatorKind.CORRELATED_PAIR:
        a2_sq = estimate_a2sq_correlated_pair(records)
    else:
        a2_sq = 0.0
    return EstimationResult(
        kind=kind,
        a1_hat=a1_hat,
        a4_hat=a4_hat,
        a2_sq_hat=a2_sq,
        p2_hat=_plug_in(a1_hat, a4_hat, a2_sq),
        n=n,
    )


def estimate_all(
    records: IntensityRecords, kinds: Iterable[EstimatorKind]
) -> Dict[EstimatorKind, EstimationResult]:
    """
    Run several estimators on the same samples.

    Two-image estimators get the cross-free view so they cannot read it.
    """
    two_image = records.drop_cross()
    results: Dict[EstimatorKind, EstimationResult] = {}
    for kind in kinds:
        source = records if kind.needs_cross else two_image
        results[kind] = estimate_p2(source, kind)
    return results


def mean_pixel_osci(records: IntensityRecords) -> float:
    """
    Mean over samples of the per-pixel OSCI ((I1 - I2)/(I1 + I2))^2.

    Samples with I1 + I2 = 0 are skipped. This is not the region-level OSCI
    estimate: its expectation differs from ((a1 - a4)/(a1 + a4))^2.
    """
    total = records.i1 + records.i2
    lit = total > 0
    if not np.any(lit):
        raise DomainError("dark region: every sample has zero intensity")
    eta = (records.i1[lit] - records.i2[lit]) / total[lit]
    return float(np.mean(eta * eta))
