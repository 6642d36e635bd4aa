"""
Built-in experiment presets.

paper-default  G1..G6, R = 1000, N = 10000            -> fig1, fig2
paper-sweep    G1, G5, R = 1000, N in {100 .. 10000}  -> fig3 .. fig6
paper-figures  both grids in one campaign             -> fig1 .. fig6

Presets are configuration documents so they go through the same parser
as user files.
"""

from __future__ import annotations

from typing import Dict, Sequence

from polspeckle.core.errors import ConfigError
from polspeckle.core.polcore import reference_matrices
from polspeckle.experiments.config import RunConfig, parse_config

BENCHMARK_REALIZATIONS = 1000
BENCHMARK_N = 10000
BENCHMARK_SWEEP_N = (100, 500, 1000, 5000, 10000)


def _matrix_sections(names: Sequence[str]) -> str:
    matrices = reference_matrices()
    blocks = []
    for name in names:
        a1, a2_re, a2_im, a4 = matrices[name].to_tuple()
        blocks.append(
            f"[matrix {name}]\n"
            f"a1 = {a1!r}\na2_re = {a2_re!r}\na2_im = {a2_im!r}\na4 = {a4!r}\n"
        )
    return "\n".join(blocks)


def _document(figures: str, n_values: Sequence[int], names: Sequence[str], output: str) -> str:
    return (
        "mode = figures\n"
        f"figures = {figures}\n"
        f"realizations = {BENCHMARK_REALIZATIONS}\n"
        f"n_values = {', '.join(str(n) for n in n_values)}\n"
        "estimators = four_image, correlated_pair, osci\n"
        f"figure_n = {BENCHMARK_N}\n"
        "sweep_matrices = G1, G5\n"
        f"output_dir = results/{output}\n"
        "format = csv\n\n"
        + _matrix_sections(names)
    )


ALL_REFERENCE = ("G1", "G2", "G3", "G4", "G5", "G6")

PRESET_DOCUMENTS: Dict[str, str] = {
    "paper-default": _document("1, 2", (BENCHMARK_N,), ALL_REFERENCE, "paper-default"),
    "paper-sweep": _document("3, 4, 5, 6", BENCHMARK_SWEEP_N, ("G1", "G5"), "paper-sweep"),
    "paper-figures": _document("1, 2, 3, 4, 5, 6", BENCHMARK_SWEEP_N, ALL_REFERENCE, "paper-figures"),
}


def preset_names() -> Sequence[str]:
    return tuple(PRESET_DOCUMENTS)


def load_preset(name: str) -> RunConfig:
    if name not in PRESET_DOCUMENTS:
        raise ConfigError(
            f"unknown preset '{name}' (available: {', '.join(PRESET_DOCUMENTS)})", key="preset"
        )
    return parse_config(PRESET_DOCUMENTS[name])
