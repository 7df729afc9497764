import os
import tomllib
from dataclasses import dataclass, fields, is_dataclass
from functools import cache
from pathlib import Path
from typing import Any, TypeVar

from dotenv import dotenv_values

from qstat.exceptions import ConfigError

T = TypeVar("T")


@dataclass(frozen=True)
class Environment:
    threads: int = 1
    log_level: str = "INFO"


@cache
def environment(dotenv_path: str = ".env") -> Environment:
    """Read the process-wide settings.

    Values from the `.env` file are overridden by the real environment.
    """
    values = {**dotenv_values(dotenv_path), **os.environ}

    raw_threads = values.get("QSTAT_THREADS") or "1"
    try:
        threads = int(raw_threads)
    except ValueError as e:
        raise ConfigError(f"QSTAT_THREADS must be an integer, got {raw_threads!r}") from e
    if threads < 1:
        raise ConfigError(f"QSTAT_THREADS must be at least 1, got {threads}")

    log_level = (values.get("QSTAT_LOG_LEVEL") or "INFO").upper()
    return Environment(threads=threads, log_level=log_level)


def read_toml(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file {path} does not exist") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Could not parse {path}: {e}") from e


def from_section(cls: type[T], table: dict[str, Any], section: str) -> T:
    """Build a config dataclass from one TOML table, rejecting unknown keys."""
    assert is_dataclass(cls)
    known = {f.name for f in fields(cls)}
    unknown = set(table) - known
    if unknown:
        raise ConfigError(f"Unknown key(s) {sorted(unknown)} in [{section}]")
    try:
        return cls(**table)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid [{section}]: {e}") from e
