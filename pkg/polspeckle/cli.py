"""
polspeckle command line.

    python run_dop.py --preset paper-default --seed 42 --out results/ --workers 8
    python run_dop.py --config experiment.cfg --format json

Exit codes: 0 success, 2 configuration error, 3 runtime/estimation error.
Seed precedence: --seed, then SPECKLE_DOP_SEED, then the document's seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from dotenv import load_dotenv

from polspeckle.core.errors import ConfigError, DomainError, PolarimetryError
from polspeckle.estimation.maps import estimate_map, osci_map
from polspeckle.experiments.config import RunConfig, parse_config, serialize_config
from polspeckle.experiments.datasets import ALL_FIGURES, emit_figure_datasets
from polspeckle.experiments.montecarlo import CampaignReport, run_campaign
from polspeckle.experiments.presets import load_preset, preset_names
from polspeckle.formats.pfmap import encode_pfmap
from polspeckle.formats.tables import grid_to_frame, render_frame, write_files_atomically
from polspeckle.simulation.scene import render_scene
from polspeckle.utils.logging import get_logger, set_level

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

# scene maps are also exported as (x, y, value) tables up to this size
SMALL_IMAGE_PIXELS = 4096


def _u64(text: str) -> int:
    value = int(text)
    if value < 0 or value >= 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits: {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polspeckle",
        description="Degree-of-polarization estimation under speckle: Monte Carlo benchmarks "
                    "and synthetic polarimetric scenes",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="Path to a configuration document")
    source.add_argument("--preset", choices=preset_names(), help="Built-in experiment preset")
    parser.add_argument("--seed", type=_u64, default=None, help="Master seed (overrides SPECKLE_DOP_SEED)")
    parser.add_argument("--out", type=Path, default=None, help="Output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=None, help="Output format")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes (advisory)")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--dump-config", action="store_true",
                        help="Print the resolved configuration and exit")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.preset:
        config = load_preset(args.preset)
    else:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
        config = parse_config(text)

    seed = args.seed
    if seed is None and os.getenv("SPECKLE_DOP_SEED"):
        try:
            seed = _u64(os.environ["SPECKLE_DOP_SEED"])
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"invalid SPECKLE_DOP_SEED: {exc}", key="SPECKLE_DOP_SEED") from exc
    if seed is not None:
        config = config.with_seed(seed)

    updates: Dict[str, object] = {}
    if args.out is not None:
        updates["output_dir"] = str(args.out)
    if args.format is not None:
        updates["format"] = args.format
    if updates:
        config = config.model_copy(update=updates)
    return config


def _workers(args: argparse.Namespace) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    raw = os.getenv("SPECKLE_DOP_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"invalid SPECKLE_DOP_WORKERS: {raw!r}", key="SPECKLE_DOP_WORKERS") from exc


def _check_output_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}", key="output_dir") from exc
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable", key="output_dir")


def _run_grid(config: RunConfig, workers: int) -> CampaignReport:
    try:
        spec = config.campaign_spec()
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return run_campaign(spec, parallelism=workers)


def run_campaign_mode(config: RunConfig, workers: int) -> List[Path]:
    report = _run_grid(config, workers)
    out = Path(config.output_dir)
    target = out / f"campaign.{config.format}"
    return write_files_atomically({target: render_frame(report.to_frame(), config.format)})


def run_figures_mode(config: RunConfig, workers: int) -> List[Path]:
    report = _run_grid(config, workers)
    return emit_figure_datasets(
        report,
        config.output_dir,
        figures=config.figures or ALL_FIGURES,
        layout=config.figure_layout(),
        fmt=config.format,
    )


def run_scene_mode(config: RunConfig) -> List[Path]:
    try:
        scene = config.scene_spec()
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    keep_cross = any(k.needs_cross for k in config.estimators)
    pair = render_scene(scene, keep_cross=keep_cross)
    contrast = osci_map(pair)

    out = Path(config.output_dir)
    grids = {"osci": contrast.values}
    files: Dict[Path, Union[str, bytes]] = {
        out / "I1.pfmap": encode_pfmap([pair.i1]),
        out / "I2.pfmap": encode_pfmap([pair.i2]),
        out / "osci.pfmap": encode_pfmap([contrast.values]),
        out / "osci_mask.pfmap": encode_pfmap([contrast.mask.astype(float)]),
    }
    for kind in config.estimators:
        result = estimate_map(pair, window=config.map_window, kind=kind)
        files[out / f"p2_{kind.value}.pfmap"] = encode_pfmap([result.values])
        files[out / f"n_{kind.value}.pfmap"] = encode_pfmap([result.n_map.astype(float)])
        grids[f"p2_{kind.value}"] = result.values
    if pair.width * pair.height <= SMALL_IMAGE_PIXELS:
        for name, values in grids.items():
            files[out / f"{name}.{config.format}"] = render_frame(grid_to_frame(values), config.format)
    return write_files_atomically(files)


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)

    try:
        config = resolve_config(args)
        if args.dump_config:
            sys.stdout.write(serialize_config(config))
            return EXIT_OK
        _check_output_dir(Path(config.output_dir))
        logger.info(f"Run: mode={config.mode} out={config.output_dir} format={config.format}")
        if config.mode == "campaign":
            written = run_campaign_mode(config, _workers(args))
        elif config.mode == "figures":
            written = run_figures_mode(config, _workers(args))
        else:
            written = run_scene_mode(config)
    except ConfigError as exc:
        logger.error(f"Config error: {exc}")
        return EXIT_CONFIG
    except PolarimetryError as exc:
        logger.error(f"Run failed: {exc}")
        return EXIT_RUNTIME

    for path in written:
        logger.info(f"Run: wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
