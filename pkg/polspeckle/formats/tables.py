"""
Tabular output and atomic file writing.

CSV numbers use 10 significant digits; JSON carries the same decimals as
strings. Files are first written next to their target and renamed into
place only once every file of a batch has been written.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

import numpy as np
import pandas as pd

from polspeckle.utils.logging import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.10g"


def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return FLOAT_FORMAT % value
    return str(value)


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")


def frame_to_json(frame: pd.DataFrame) -> str:
    rows: List[Dict[str, str]] = [
        {column: format_number(value) for column, value in zip(frame.columns, row)}
        for row in frame.itertuples(index=False, name=None)
    ]
    return json.dumps(rows, indent=2) + "\n"


def render_frame(frame: pd.DataFrame, fmt: str) -> str:
    if fmt == "csv":
        return frame_to_csv(frame)
    if fmt == "json":
        return frame_to_json(frame)
    raise ValueError(f"unknown output format '{fmt}'")


def grid_to_frame(values: np.ndarray) -> pd.DataFrame:
    """(x, y, value) rows of a 2-D grid indexed [y, x], row-major."""
    height, width = values.shape
    ys, xs = np.mgrid[0:height, 0:width]
    return pd.DataFrame({"x": xs.ravel(), "y": ys.ravel(), "value": values.ravel()})


def write_files_atomically(files: Mapping[Union[str, Path], Union[str, bytes]]) -> List[Path]:
    """
    Write every file or none of them.

    Contents go to temporary files in the target directories; they are
    renamed over their targets only after all writes succeeded.
    """
    staged: List[tuple] = []
    try:
        for target, content in files.items():
            target = Path(target)
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
            staged.append((Path(tmp), target))
            data = content.encode("utf-8") if isinstance(content, str) else content
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
    except BaseException:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, target in staged:
        os.replace(tmp, target)
        logger.debug(f"Output: wrote {target}")
    return [target for _, target in staged]
