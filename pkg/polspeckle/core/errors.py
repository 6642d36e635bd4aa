"""
Error types shared across polspeckle.

DomainError      -- a mathematical precondition does not hold
ContractViolation -- the caller broke an API contract
ConfigError      -- a configuration document is invalid
ReportError      -- a report lacks the cells a dataset needs
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple


class PolarimetryError(Exception):
    """Base class for every error raised by polspeckle."""


class DomainError(PolarimetryError, ValueError):
    pass


class ContractViolation(PolarimetryError):
    pass


class ConfigError(PolarimetryError):
    """Invalid configuration; names the offending line and key when known."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.message = message
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class ReportError(PolarimetryError):
    """A campaign report does not cover the requested grid."""

    def __init__(self, message: str, missing: Sequence[Tuple[str, int]] = ()):
        self.missing: List[Tuple[str, int]] = list(missing)
        if self.missing:
            listed = ", ".join(f"({name}, {n})" for name, n in self.missing)
            message = f"{message}: missing {listed}"
        super().__init__(message)
