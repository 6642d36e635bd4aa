"""
Plain-text Jones ensemble dump, for golden tests across implementations.

    N <n>
    <AX.re> <AX.im> <AY.re> <AY.im>     (one line per sample)

Decimals use the shortest representation that round-trips exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from polspeckle.core.errors import DomainError
from polspeckle.formats.tables import write_files_atomically
from polspeckle.simulation.speckle import JonesEnsemble


def dump_ensemble(ensemble: JonesEnsemble) -> str:
    lines = [f"N {len(ensemble)}"]
    for row in ensemble.samples.view(np.float64).tolist():
        lines.append(" ".join(repr(value) for value in row))
    return "\n".join(lines) + "\n"


def parse_ensemble(text: str) -> JonesEnsemble:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise DomainError("empty ensemble dump")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "N":
        raise DomainError(f"bad ensemble header: {lines[0]!r}")
    n = int(header[1])
    body = lines[1:]
    if len(body) != n:
        raise DomainError(f"ensemble header announces {n} samples, found {len(body)}")
    values = np.empty((n, 4), dtype=np.float64)
    for k, line in enumerate(body):
        fields = line.split()
        if len(fields) != 4:
            raise DomainError(f"sample line {k + 2}: expected 4 fields, got {len(fields)}")
        values[k] = [float(f) for f in fields]
    return JonesEnsemble(samples=values[:, 0::2] + 1j * values[:, 1::2])


def write_ensemble(ensemble: JonesEnsemble, path: Union[str, Path]) -> Path:
    path = Path(path)
    write_files_atomically({path: dump_ensemble(ensemble)})
    return path


def read_ensemble(path: Union[str, Path]) -> JonesEnsemble:
    return parse_ensemble(Path(path).read_text())
