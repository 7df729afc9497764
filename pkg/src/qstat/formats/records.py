"""ClickRecord CSV: one row per intensity point."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pandas as pd

from qstat.detect import ClickRecord
from qstat.exceptions import QstatError, SchemaError
from qstat.log import logger

HEADER = ["intensity", "R0", "R1A", "R1B", "R2", "RSA", "RSB", "RC", "NP"]
FLOAT_FORMAT = "%.12g"


def _count(value: str, column: str, line: int) -> int:
    try:
        count = int(value)
    except ValueError as e:
        raise SchemaError(f"{column} must be a non-negative integer, got {value!r}", line) from e
    if count < 0:
        raise SchemaError(f"{column} must be a non-negative integer, got {value!r}", line)
    return count


def read_records(path: str | Path) -> list[tuple[float, ClickRecord]]:
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        logger.warning(f"{path} is empty")
        return []
    except FileNotFoundError as e:
        raise SchemaError(f"{path} does not exist") from e

    if list(df.columns) != HEADER:
        raise SchemaError(f"Expected header {','.join(HEADER)}, got {','.join(df.columns)}", 1)
    if df.empty:
        logger.warning(f"{path} has no records")

    rows = []
    for index, raw in df.iterrows():
        line = int(index) + 2
        try:
            intensity = float(raw["intensity"])
        except ValueError as e:
            raise SchemaError(f"intensity is not a number: {raw['intensity']!r}", line) from e
        if not math.isfinite(intensity):
            raise SchemaError(f"intensity must be finite, got {intensity}", line)
        counts = [_count(raw[column], column, line) for column in HEADER[1:]]
        try:
            record = ClickRecord.from_counts(counts[:-1], n_pulses=counts[-1])
        except QstatError as e:
            raise SchemaError(str(e), line) from e
        rows.append((intensity, record))
    return rows


def write_records(path: str | Path, rows: list[tuple[float, ClickRecord]]) -> None:
    table = np.array([[*record.counts(), record.n_pulses] for _, record in rows]).reshape(-1, 8)
    df = pd.DataFrame({"intensity": [intensity for intensity, _ in rows]})
    for i, column in enumerate(HEADER[1:]):
        values = table[:, i]
        integral = np.all(values == np.rint(values))
        df[column] = values.astype(np.int64) if integral else values
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Wrote {len(rows)} records to {path}")
