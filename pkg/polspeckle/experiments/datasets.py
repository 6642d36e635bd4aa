"""
Figure Datasets
===============
Turns a campaign report into the six tables behind the benchmark figures.
Column suffixes follow the estimator labels: A (four images), I
(correlated pair), OSCI.

    fig1  matrix_id, true_p2, mean_A, mean_I, mean_OSCI       grid at figure_n
    fig2  matrix_id, sd_A, sd_I, sd_OSCI                      grid at figure_n
    fig3  n, true_p2, mean_A, mean_I, mean_OSCI               first sweep matrix
    fig4  n, n_var_A, n_var_I, n_var_OSCI                     first sweep matrix
    fig5  as fig3                                             second sweep matrix
    fig6  as fig4                                             second sweep matrix
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from polspeckle.core.errors import ReportError
from polspeckle.estimation.estimators import EstimatorKind
from polspeckle.experiments.montecarlo import CampaignReport
from polspeckle.formats.tables import render_frame, write_files_atomically
from polspeckle.utils.logging import get_logger

logger = get_logger(__name__)

ALL_FIGURES: Tuple[int, ...] = (1, 2, 3, 4, 5, 6)

# column order of every figure table
FIGURE_KINDS: Tuple[EstimatorKind, ...] = (
    EstimatorKind.FOUR_IMAGE,
    EstimatorKind.CORRELATED_PAIR,
    EstimatorKind.OSCI,
)

DEFAULT_FIGURE_N = 10000
DEFAULT_SWEEP_MATRICES = ("G1", "G5")


@dataclass(frozen=True)
class FigureLayout:
    """Which matrices and sample counts each figure is drawn from."""
    grid_matrices: Tuple[str, ...]
    figure_n: int = DEFAULT_FIGURE_N
    sweep_matrices: Tuple[str, str] = DEFAULT_SWEEP_MATRICES
    sweep_n: Tuple[int, ...] = (100, 500, 1000, 5000, 10000)

    @classmethod
    def for_report(
        cls,
        report: CampaignReport,
        figure_n: Optional[int] = None,
        sweep_matrices: Optional[Sequence[str]] = None,
    ) -> "FigureLayout":
        return cls(
            grid_matrices=tuple(report.spec.matrix_names),
            figure_n=figure_n or DEFAULT_FIGURE_N,
            sweep_matrices=tuple(sweep_matrices or DEFAULT_SWEEP_MATRICES),
            sweep_n=tuple(report.spec.n_values),
        )

    def cells(self, figure: int) -> List[Tuple[str, int]]:
        if figure in (1, 2):
            return [(m, self.figure_n) for m in self.grid_matrices]
        if figure in (3, 4):
            return [(self.sweep_matrices[0], n) for n in self.sweep_n]
        if figure in (5, 6):
            return [(self.sweep_matrices[1], n) for n in self.sweep_n]
        raise ValueError(f"unknown figure {figure}")


def _grid_table(report: CampaignReport, layout: FigureLayout, figure: int) -> pd.DataFrame:
    rows = []
    for index, (matrix, n) in enumerate(layout.cells(figure), start=1):
        row: Dict[str, object] = {"matrix_id": index}
        if figure == 1:
            row["true_p2"] = report.cell(matrix, n, FIGURE_KINDS[0]).true_p2
            for kind in FIGURE_KINDS:
                row[f"mean_{kind.label}"] = report.cell(matrix, n, kind).mean_p2
        else:
            for kind in FIGURE_KINDS:
                row[f"sd_{kind.label}"] = report.cell(matrix, n, kind).std_p2
        rows.append(row)
    return pd.DataFrame(rows)


def _sweep_table(report: CampaignReport, layout: FigureLayout, figure: int) -> pd.DataFrame:
    rows = []
    for matrix, n in layout.cells(figure):
        row: Dict[str, object] = {"n": n}
        if figure in (3, 5):
            row["true_p2"] = report.cell(matrix, n, FIGURE_KINDS[0]).true_p2
            for kind in FIGURE_KINDS:
                row[f"mean_{kind.label}"] = report.cell(matrix, n, kind).mean_p2
        else:
            for kind in FIGURE_KINDS:
                row[f"n_var_{kind.label}"] = report.cell(matrix, n, kind).n_times_var
        rows.append(row)
    return pd.DataFrame(rows)


def figure_tables(
    report: CampaignReport,
    figures: Sequence[int] = ALL_FIGURES,
    layout: Optional[FigureLayout] = None,
) -> Dict[int, pd.DataFrame]:
    """Build the requested tables; fails before anything is written."""
    layout = layout or FigureLayout.for_report(report)
    if not figures:
        raise ReportError("no figure requested")
    missing: List[Tuple[str, int]] = []
    for figure in figures:
        for matrix, n in layout.cells(figure):
            if (matrix, n) not in missing and not all(
                report.has_cell(matrix, n, k) for k in FIGURE_KINDS
            ):
                missing.append((matrix, n))
    if missing:
        raise ReportError(f"report does not cover figures {list(figures)}", missing)
    return {
        figure: _grid_table(report, layout, figure) if figure in (1, 2)
        else _sweep_table(report, layout, figure)
        for figure in figures
    }


def emit_figure_datasets(
    report: CampaignReport,
    output_dir: Union[str, Path],
    figures: Sequence[int] = ALL_FIGURES,
    layout: Optional[FigureLayout] = None,
    fmt: str = "csv",
) -> List[Path]:
    """Write fig<k>.csv (or .json) for every requested figure, all or none."""
    tables = figure_tables(report, figures, layout)
    out = Path(output_dir)
    files = {out / f"fig{figure}.{fmt}": render_frame(frame, fmt) for figure, frame in tables.items()}
    written = write_files_atomically(files)
    logger.info(f"Datasets: wrote {', '.join(p.name for p in written)} to {out}")
    return written
