"""
Logging helpers.

All modules obtain their logger through ``get_logger(__name__)`` so output
shares one handler and one level, set from ``SPECKLE_DOP_LOG_LEVEL``.
"""

from __future__ import annotations

import logging
import os
import sys
from typing import Optional

ROOT_LOGGER_NAME = "polspeckle"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_configured = False


def _configure_root(level: Optional[str] = None) -> None:
    global _configured
    root = logging.getLogger(ROOT_LOGGER_NAME)
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    level_name = (level or os.getenv("SPECKLE_DOP_LOG_LEVEL", "INFO")).upper()
    root.setLevel(getattr(logging, level_name, logging.INFO))


def set_level(level: str) -> None:
    """Change the level of every polspeckle logger (CLI ``--log-level``)."""
    _configure_root(level)


def get_logger(name: str) -> logging.Logger:
    """Return a child of the ``polspeckle`` logger."""
    if not _configured:
        _configure_root()
    if name == ROOT_LOGGER_NAME or name.startswith(ROOT_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
