"""
Monte Carlo Campaigns
=====================
Runs R independent realizations for every (matrix, N) cell of a grid and
reduces the per-realization P^2 estimates of each estimator into the
statistics behind the benchmark figures: mean, unbiased variance and
N * variance.

Determinism:
- realization r of cell (m, n) samples from stream
  derive_stream_id(m, n, r) under the master seed
- every estimator of a realization sees the same records (paired design)
- per-realization results are sorted by r before reduction
so a report is bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from polspeckle.core.errors import DomainError, PolarimetryError
from polspeckle.core.polcore import CoherencyMatrix, degree_of_polarization_squared, osci_bias
from polspeckle.estimation.estimators import ALL_ESTIMATORS, EstimatorKind, estimate_all
from polspeckle.simulation.speckle import sample_jones, to_intensity_records
from polspeckle.simulation.streams import SamplerConfig, derive_stream_id
from polspeckle.utils.logging import get_logger

logger = get_logger(__name__)

# A realization's outcome per estimator: the P^2 estimate, or the error text.
Outcome = Dict[EstimatorKind, Any]


@dataclass(frozen=True)
class CampaignSpec:
    """
    Grid of a Monte Carlo campaign.

    matrices are (name, Gamma) pairs; their order fixes the matrix index
    used in stream derivation, as does the order of n_values.
    """
    matrices: Tuple[Tuple[str, CoherencyMatrix], ...]
    n_values: Tuple[int, ...] = (10000,)
    realizations: int = 1000             # R
    master_seed: int = 0
    estimators: Tuple[EstimatorKind, ...] = ALL_ESTIMATORS

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrices", tuple((str(k), g) for k, g in self.matrices))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "estimators", tuple(dict.fromkeys(self.estimators)))
        names = [name for name, _ in self.matrices]
        if not names:
            raise DomainError("campaign needs at least one matrix")
        if len(set(names)) != len(names):
            raise DomainError(f"matrix names must be unique, got {names}")
        for name, gamma in self.matrices:
            if gamma.trace <= 0:
                raise DomainError(f"degenerate coherency matrix '{name}': zero trace")
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise DomainError(f"every N must be >= 2, got {list(self.n_values)}")
        if len(set(self.n_values)) != len(self.n_values):
            raise DomainError(f"N values must be unique, got {list(self.n_values)}")
        if self.realizations < 2:
            raise DomainError(f"realizations must be >= 2, got {self.realizations}")
        if not self.estimators:
            raise DomainError("campaign needs at least one estimator")

    @property
    def matrix_names(self) -> List[str]:
        return [name for name, _ in self.matrices]

    def matrix(self, name: str) -> CoherencyMatrix:
        return dict(self.matrices)[name]


@dataclass(frozen=True)
class CellStats:
    """Statistics of one estimator over the realizations of one grid cell."""
    matrix: str
    n: int
    kind: EstimatorKind
    true_p2: float
    mean_p2: float
    var_p2: float
    n_times_var: float
    realization_count: int
    failed_realizations: int = 0
    diagnostics: Tuple[str, ...] = ()
    osci_bias: float = 0.0

    @property
    def std_p2(self) -> float:
        return math.sqrt(self.var_p2) if self.var_p2 >= 0 else math.nan

    @property
    def bias(self) -> float:
        return self.mean_p2 - self.true_p2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "matrix": self.matrix,
            "n": self.n,
            "estimator": self.kind.value,
            "true_p2": self.true_p2,
            "mean_p2": self.mean_p2,
            "var_p2": self.var_p2,
            "std_p2": self.std_p2,
            "n_times_var": self.n_times_var,
            "bias": self.bias,
            "osci_bias": self.osci_bias,
            "realization_count": self.realization_count,
            "failed_realizations": self.failed_realizations,
        }


@dataclass
class CampaignReport:
    spec: CampaignSpec
    cells: Dict[Tuple[str, int, EstimatorKind], CellStats] = field(default_factory=dict)

    def cell(self, matrix: str, n: int, kind: EstimatorKind) -> CellStats:
        return self.cells[(matrix, n, kind)]

    def has_cell(self, matrix: str, n: int, kind: EstimatorKind) -> bool:
        return (matrix, n, kind) in self.cells

    def missing_cells(
        self, matrices: Sequence[str], n_values: Sequence[int], kinds: Sequence[EstimatorKind]
    ) -> List[Tuple[str, int]]:
        """(matrix, n) pairs of the requested grid lacking any requested estimator."""
        return [
            (m, n)
            for m in matrices
            for n in n_values
            if not all(self.has_cell(m, n, k) for k in kinds)
        ]

    def to_frame(self) -> pd.DataFrame:
        """One row per cell in grid order (matrix, N, estimator)."""
        rows = [
            self.cells[(m, n, k)].to_dict()
            for m in self.spec.matrix_names
            for n in self.spec.n_values
            for k in self.spec.estimators
            if (m, n, k) in self.cells
        ]
        return pd.DataFrame(rows)


# ============================================================================
# STATISTICS
# ============================================================================

def variance_statistics(p2_samples: Sequence[float], n: int) -> Tuple[float, float, float]:
    """(mean, unbiased variance, n * variance) of per-realization estimates."""
    samples = np.asarray(p2_samples, dtype=np.float64)
    if samples.size < 2:
        raise DomainError(f"variance needs at least 2 samples, got {samples.size}")
    mean = float(np.mean(samples))
    variance = float(np.var(samples, ddof=1))
    return mean, variance, n * variance


# ============================================================================
# EXECUTION
# ============================================================================

@dataclass(frozen=True)
class _Task:
    matrix_index: int
    n_index: int
    gamma: CoherencyMatrix
    n: int
    estimators: Tuple[EstimatorKind, ...]
    master_seed: int
    realizations: Tuple[int, ...]


def _run_task(task: _Task) -> Tuple[int, int, List[Tuple[int, Outcome]]]:
    keep_cross = any(k.needs_cross for k in task.estimators)
    outcomes: List[Tuple[int, Outcome]] = []
    for r in task.realizations:
        cfg = SamplerConfig(
            seed=task.master_seed,
            stream_id=derive_stream_id(task.matrix_index, task.n_index, r),
        )
        try:
            records = to_intensity_records(sample_jones(task.gamma, task.n, cfg), keep_cross)
        except PolarimetryError as exc:
            outcomes.append((r, {k: str(exc) for k in task.estimators}))
            continue
        outcome: Outcome = {}
        for kind in task.estimators:
            try:
                outcome[kind] = estimate_all(records, (kind,))[kind].p2_hat
            except PolarimetryError as exc:
                outcome[kind] = str(exc)
        outcomes.append((r, outcome))
    return task.matrix_index, task.n_index, outcomes


def _plan_tasks(spec: CampaignSpec, workers: int) -> List[_Task]:
    # a few chunks per worker keeps the pool busy near the end of the grid
    cells = len(spec.matrices) * len(spec.n_values)
    chunks_per_cell = max(1, math.ceil(4 * workers / cells)) if workers > 1 else 1
    chunk = max(1, math.ceil(spec.realizations / chunks_per_cell))
    tasks = []
    for m_idx, (_, gamma) in enumerate(spec.matrices):
        for n_idx, n in enumerate(spec.n_values):
            for start in range(0, spec.realizations, chunk):
                stop = min(spec.realizations, start + chunk)
                tasks.append(_Task(
                    matrix_index=m_idx,
                    n_index=n_idx,
                    gamma=gamma,
                    n=n,
                    estimators=spec.estimators,
                    master_seed=spec.master_seed,
                    realizations=tuple(range(start, stop)),
                ))
    return tasks


def _reduce_cell(
    name: str, gamma: CoherencyMatrix, n: int, kind: EstimatorKind,
    outcomes: List[Tuple[int, Outcome]],
) -> CellStats:
    values: List[float] = []
    diagnostics: List[str] = []
    for r, outcome in outcomes:
        value = outcome[kind]
        if isinstance(value, str):
            diagnostics.append(f"realization {r}: {value}")
        else:
            values.append(value)
    if diagnostics:
        logger.warning(
            f"Campaign: {name} N={n} {kind.value}: {len(diagnostics)} realization(s) excluded "
            f"(first: {diagnostics[0]})"
        )
    if len(values) >= 2:
        mean, variance, n_var = variance_statistics(values, n)
    else:
        diagnostics.append(f"only {len(values)} valid realization(s); statistics undefined")
        mean = variance = n_var = math.nan
    return CellStats(
        matrix=name,
        n=n,
        kind=kind,
        true_p2=degree_of_polarization_squared(gamma),
        mean_p2=mean,
        var_p2=variance,
        n_times_var=n_var,
        realization_count=len(values),
        failed_realizations=len(outcomes) - len(values),
        diagnostics=tuple(diagnostics),
        osci_bias=osci_bias(gamma),
    )


def run_campaign(spec: CampaignSpec, parallelism: Optional[int] = 1) -> CampaignReport:
    """
    Run every cell of the grid. ``parallelism`` is a worker-count hint;
    it changes run time, never results.
    """
    workers = max(1, int(parallelism or 1))
    tasks = _plan_tasks(spec, workers)
    logger.info(
        f"Campaign: {len(spec.matrices)} matrices x {len(spec.n_values)} N x "
        f"{spec.realizations} realizations, estimators="
        f"{','.join(k.value for k in spec.estimators)}, seed={spec.master_seed}, workers={workers}"
    )

    collected: Dict[Tuple[int, int], List[Tuple[int, Outcome]]] = {}
    if workers == 1:
        for m_idx, n_idx, outcomes in map(_run_task, tasks):
            collected.setdefault((m_idx, n_idx), []).extend(outcomes)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for m_idx, n_idx, outcomes in pool.map(_run_task, tasks):
                collected.setdefault((m_idx, n_idx), []).extend(outcomes)

    report = CampaignReport(spec=spec)
    for m_idx, (name, gamma) in enumerate(spec.matrices):
        for n_idx, n in enumerate(spec.n_values):
            outcomes = sorted(collected[(m_idx, n_idx)], key=lambda item: item[0])
            for kind in spec.estimators:
                stats = _reduce_cell(name, gamma, n, kind, outcomes)
                report.cells[(name, n, kind)] = stats
                logger.debug(
                    f"Campaign: {name} N={n} {kind.value}: mean={stats.mean_p2:.6f} "
                    f"true={stats.true_p2:.6f} var={stats.var_p2:.3e}"
                )
    logger.info(f"Campaign: done, {len(report.cells)} cells")
    return report
