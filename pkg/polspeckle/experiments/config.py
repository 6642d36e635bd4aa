"""
Run Configuration
=================
Line-oriented configuration documents:

    # comment
    mode = figures            # campaign | scene | figures
    realizations = 1000
    n_values = 100, 1000, 10000
    estimators = four_image, correlated_pair, osci

    [matrix G1]
    a1 = 15
    a2_re = 0.2
    a2_im = 0.5
    a4 = 6

    [region left]             # scene mode, half-open pixel rectangle
    x0 = 0
    y0 = 0
    x1 = 64
    y1 = 128
    matrix = G1

Parsing is strict: unknown or repeated keys are errors, and every matrix
is checked for positive semidefiniteness while parsing. Errors name the
line and key.
"""

from __future__ import annotations

import re
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from polspeckle.core.errors import ConfigError, DomainError
from polspeckle.core.polcore import CoherencyMatrix
from polspeckle.estimation.estimators import ALL_ESTIMATORS, EstimatorKind
from polspeckle.estimation.maps import DEFAULT_WINDOW
from polspeckle.experiments.datasets import (
    ALL_FIGURES,
    DEFAULT_FIGURE_N,
    DEFAULT_SWEEP_MATRICES,
    FigureLayout,
)
from polspeckle.experiments.montecarlo import CampaignSpec
from polspeckle.simulation.scene import Region, SceneSpec

U64_MAX = (1 << 64) - 1

Mode = Literal["campaign", "scene", "figures"]


# ============================================================================
# MODELS
# ============================================================================

class MatrixEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    a1: float
    a4: float
    a2_re: float = 0.0
    a2_im: float = 0.0

    @model_validator(mode="after")
    def _check_psd(self) -> "MatrixEntry":
        try:
            self.gamma()
        except DomainError as exc:
            raise ValueError(f"matrix '{self.name}': {exc}") from exc
        return self

    def gamma(self) -> CoherencyMatrix:
        return CoherencyMatrix(a1=self.a1, a4=self.a4, a2=complex(self.a2_re, self.a2_im))


class RegionEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    x0: int
    y0: int
    x1: int
    y1: int
    matrix: str


class RunConfig(BaseModel):
    """A parsed configuration document; exactly one mode's payload is set."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: Mode
    output_dir: str = "results"
    format: Literal["csv", "json"] = "csv"
    matrices: Tuple[MatrixEntry, ...] = ()

    # campaign / figures
    master_seed: Optional[int] = Field(default=None, ge=0, le=U64_MAX)
    realizations: Optional[int] = Field(default=None, ge=2)
    n_values: Optional[Tuple[int, ...]] = None
    estimators: Tuple[EstimatorKind, ...] = ALL_ESTIMATORS
    figures: Optional[Tuple[int, ...]] = None
    sweep_matrices: Optional[Tuple[str, str]] = None
    figure_n: Optional[int] = Field(default=None, ge=2)

    # scene
    width: Optional[int] = Field(default=None, ge=1)
    height: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, le=U64_MAX)
    window: Optional[int] = None
    background: Optional[str] = None
    regions: Tuple[RegionEntry, ...] = ()

    @field_validator("n_values")
    @classmethod
    def _check_n_values(cls, value: Optional[Tuple[int, ...]]) -> Optional[Tuple[int, ...]]:
        if value is not None and (not value or any(n < 2 for n in value)):
            raise ValueError("every N must be >= 2")
        if value is not None and len(set(value)) != len(value):
            raise ValueError(f"N values must be unique, got {list(value)}")
        return value

    @field_validator("figures")
    @classmethod
    def _check_figures(cls, value: Optional[Tuple[int, ...]]) -> Optional[Tuple[int, ...]]:
        if value is not None and (not value or any(f not in ALL_FIGURES for f in value)):
            raise ValueError(f"figures must be drawn from {list(ALL_FIGURES)}")
        return value

    @field_validator("window")
    @classmethod
    def _check_window(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and (value < 3 or value % 2 == 0):
            raise ValueError("window must be an odd size >= 3")
        return value

    @model_validator(mode="after")
    def _check_payload(self) -> "RunConfig":
        names = [m.name for m in self.matrices]
        if len(set(names)) != len(names):
            raise ValueError(f"matrix names must be unique, got {names}")
        known = set(names)
        campaign_keys = ("master_seed", "realizations", "n_values", "figures",
                         "sweep_matrices", "figure_n")
        scene_keys = ("width", "height", "seed", "window", "background")

        if self.mode == "scene":
            stray = [k for k in campaign_keys if getattr(self, k) is not None]
            if stray:
                raise ValueError(f"scene mode does not take {', '.join(stray)}")
            for key in ("width", "height", "background"):
                if getattr(self, key) is None:
                    raise ValueError(f"scene mode requires '{key}'")
            if self.background not in known:
                raise ValueError(f"unknown background matrix '{self.background}'")
            for region in self.regions:
                if region.matrix not in known:
                    raise ValueError(f"region '{region.name}' uses unknown matrix '{region.matrix}'")
        else:
            stray = [k for k in scene_keys if getattr(self, k) is not None]
            if self.regions:
                stray.append("region sections")
            if stray:
                raise ValueError(f"{self.mode} mode does not take {', '.join(stray)}")
            if not self.matrices:
                raise ValueError(f"{self.mode} mode requires at least one [matrix] section")
            for key in ("realizations", "n_values"):
                if getattr(self, key) is None:
                    raise ValueError(f"{self.mode} mode requires '{key}'")
            if self.mode == "campaign" and (self.figures or self.sweep_matrices or self.figure_n):
                raise ValueError("figure keys are only valid in figures mode")
            for name in self.sweep_matrices or ():
                if name not in known:
                    raise ValueError(f"unknown sweep matrix '{name}'")
        return self

    # -- domain views -------------------------------------------------------

    def gammas(self) -> Dict[str, CoherencyMatrix]:
        return {m.name: m.gamma() for m in self.matrices}

    def campaign_spec(self) -> CampaignSpec:
        return CampaignSpec(
            matrices=tuple(self.gammas().items()),
            n_values=self.n_values or (),
            realizations=self.realizations or 0,
            master_seed=self.master_seed or 0,
            estimators=self.estimators,
        )

    def scene_spec(self) -> SceneSpec:
        gammas = self.gammas()
        regions = tuple(
            Region(x0=r.x0, y0=r.y0, x1=r.x1, y1=r.y1, gamma=gammas[r.matrix], name=r.name)
            for r in self.regions
        )
        return SceneSpec(
            width=self.width or 0,
            height=self.height or 0,
            background=gammas[self.background or ""],
            regions=regions,
            seed=self.seed or 0,
        )

    def figure_layout(self) -> FigureLayout:
        return FigureLayout(
            grid_matrices=tuple(m.name for m in self.matrices),
            figure_n=self.figure_n or DEFAULT_FIGURE_N,
            sweep_matrices=self.sweep_matrices or DEFAULT_SWEEP_MATRICES,
            sweep_n=self.n_values or (),
        )

    @property
    def map_window(self) -> int:
        return self.window or DEFAULT_WINDOW

    def with_seed(self, seed: int) -> "RunConfig":
        key = "seed" if self.mode == "scene" else "master_seed"
        return RunConfig.model_validate({**self.model_dump(), key: seed})


# ============================================================================
# PARSER
# ============================================================================

_SECTION = re.compile(r"^\[\s*(matrix|region)\s+([A-Za-z0-9_.\-]+)\s*\]$")
_ASSIGN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _ints(value: str) -> Tuple[int, ...]:
    return tuple(int(item) for item in _split(value))


def _estimators(value: str) -> Tuple[EstimatorKind, ...]:
    return tuple(EstimatorKind.parse(item) for item in _split(value))


TOP_KEYS: Dict[str, Callable[[str], Any]] = {
    "mode": str,
    "output_dir": str,
    "format": str,
    "master_seed": int,
    "realizations": int,
    "n_values": _ints,
    "estimators": _estimators,
    "figures": _ints,
    "sweep_matrices": lambda v: tuple(_split(v)),
    "figure_n": int,
    "width": int,
    "height": int,
    "seed": int,
    "window": int,
    "background": str,
}

SECTION_KEYS: Dict[str, Dict[str, Callable[[str], Any]]] = {
    "matrix": {"a1": float, "a2_re": float, "a2_im": float, "a4": float},
    "region": {"x0": int, "y0": int, "x1": int, "y1": int, "matrix": str},
}


class _Section:
    def __init__(self, kind: str, name: str, line: int):
        self.kind = kind
        self.name = name
        self.line = line
        self.values: Dict[str, Any] = {"name": name}
        self.lines: Dict[str, int] = {}


def parse_config(text: str) -> RunConfig:
    """Parse a configuration document into a validated RunConfig."""
    top: Dict[str, Any] = {}
    top_lines: Dict[str, int] = {}
    sections: List[_Section] = []
    current: Optional[_Section] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = _SECTION.match(line)
        if header:
            current = _Section(header.group(1), header.group(2), lineno)
            sections.append(current)
            continue
        if line.startswith("["):
            raise ConfigError(f"malformed section header '{line}'", line=lineno)
        assign = _ASSIGN.match(line)
        if not assign:
            raise ConfigError(f"expected 'key = value', got '{line}'", line=lineno)
        key, value = assign.group(1), assign.group(2).strip()

        table = TOP_KEYS if current is None else SECTION_KEYS[current.kind]
        target = top if current is None else current.values
        lines = top_lines if current is None else current.lines
        if key not in table:
            where = "top level" if current is None else f"[{current.kind} {current.name}]"
            raise ConfigError(f"unknown key in {where}", line=lineno, key=key)
        if key in target:
            raise ConfigError("duplicate key", line=lineno, key=key)
        try:
            target[key] = table[key](value)
        except ValueError as exc:
            raise ConfigError(f"invalid value '{value}': {exc}", line=lineno, key=key) from exc
        lines[key] = lineno

    matrices = [s for s in sections if s.kind == "matrix"]
    regions = [s for s in sections if s.kind == "region"]
    for section in matrices:
        _check_matrix_section(section)

    document = dict(top)
    document["matrices"] = [s.values for s in matrices]
    document["regions"] = [s.values for s in regions]
    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        error = exc.errors()[0]
        line, key = _locate(error["loc"], top_lines, matrices, regions)
        raise ConfigError(error["msg"], line=line, key=key) from exc


def _check_matrix_section(section: _Section) -> None:
    for key in ("a1", "a4"):
        if key not in section.values:
            raise ConfigError(f"[matrix {section.name}] is missing '{key}'", line=section.line, key=key)
    try:
        CoherencyMatrix(
            a1=section.values["a1"],
            a4=section.values["a4"],
            a2=complex(section.values.get("a2_re", 0.0), section.values.get("a2_im", 0.0)),
        )
    except DomainError as exc:
        raise ConfigError(f"matrix '{section.name}': {exc}", line=section.line) from exc


def _locate(loc: Tuple, top_lines: Dict[str, int], matrices: List[_Section],
            regions: List[_Section]) -> Tuple[Optional[int], Optional[str]]:
    if not loc:
        return None, None
    head = loc[0]
    if head in ("matrices", "regions") and len(loc) >= 2 and isinstance(loc[1], int):
        group = matrices if head == "matrices" else regions
        section = group[loc[1]]
        key = loc[2] if len(loc) > 2 and isinstance(loc[2], str) else None
        return section.lines.get(key, section.line) if key else section.line, key
    if isinstance(head, str):
        return top_lines.get(head), head
    return None, None


# ============================================================================
# SERIALIZER
# ============================================================================

def _format_value(value: Any) -> str:
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, EstimatorKind):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config: RunConfig) -> str:
    """Inverse of parse_config: parse_config(serialize_config(c)) == c."""
    lines = []
    for key in TOP_KEYS:
        value = getattr(config, key)
        if value is None:
            continue
        lines.append(f"{key} = {_format_value(value)}")
    for matrix in config.matrices:
        lines.append("")
        lines.append(f"[matrix {matrix.name}]")
        for key in SECTION_KEYS["matrix"]:
            lines.append(f"{key} = {_format_value(getattr(matrix, key))}")
    for region in config.regions:
        lines.append("")
        lines.append(f"[region {region.name}]")
        for key in SECTION_KEYS["region"]:
            lines.append(f"{key} = {_format_value(getattr(region, key))}")
    return "\n".join(lines) + "\n"
