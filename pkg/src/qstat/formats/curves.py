"""Observable CSVs: `<kind>.csv` with columns x (intensity), mean_photons, value[, sigma]."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from qstat.exceptions import SchemaError
from qstat.fit.observables import ObservableCurve, ObservableKind
from qstat.formats.records import FLOAT_FORMAT
from qstat.log import logger

REQUIRED = ["x", "mean_photons", "value"]
MISSING = {"nan", "NaN", ""}


def write_curve(directory: str | Path, curve: ObservableCurve) -> Path:
    path = Path(directory) / f"{curve.kind}.csv"
    intensity = curve.intensity if curve.intensity is not None else [float("nan")] * len(curve)
    df = pd.DataFrame({"x": intensity, "mean_photons": curve.x, "value": curve.y})
    if curve.sigma is not None:
        df["sigma"] = curve.sigma
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    return path


def _numeric(df: pd.DataFrame, column: str) -> pd.Series:
    values = pd.to_numeric(df[column], errors="coerce")
    bad = values.isna() & ~df[column].str.strip().isin(MISSING)
    if bad.any():
        index = int(bad.idxmax())
        raise SchemaError(f"{column} is not a number: {df[column][index]!r}", index + 2)
    return values


def read_curve(path: str | Path) -> ObservableCurve:
    path = Path(path)
    try:
        kind = ObservableKind(path.stem)
    except ValueError as e:
        raise SchemaError(f"{path.name} does not name an observable") from e
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise SchemaError(f"{path} is empty") from e

    missing = [column for column in REQUIRED if column not in df.columns]
    if missing:
        raise SchemaError(f"{path.name} lacks column(s) {missing}", 1)
    sigma = _numeric(df, "sigma").to_numpy() if "sigma" in df.columns else None
    return ObservableCurve(
        kind,
        x=_numeric(df, "mean_photons").to_numpy(),
        y=_numeric(df, "value").to_numpy(),
        sigma=sigma,
        intensity=_numeric(df, "x").to_numpy(),
    )


def read_curves(directory: str | Path) -> dict[ObservableKind, ObservableCurve]:
    """Every `<kind>.csv` in a directory; other files are ignored."""
    kinds = {kind.value for kind in ObservableKind}
    curves = {}
    for path in sorted(Path(directory).glob("*.csv")):
        if path.stem in kinds:
            curve = read_curve(path)
            curves[curve.kind] = curve
    logger.debug(f"Read {sorted(curves)} from {directory}")
    return curves
