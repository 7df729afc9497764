"""Per-record witness report: every estimator with its propagated uncertainty."""

import math
from collections.abc import Callable
from functools import partial

import numpy as np

from qstat.detect import (
    ClickRecord,
    G2Form,
    heralded_g2_from_probs,
    heralded_g2_from_record,
    probabilities_from_record,
)
from qstat.exceptions import NumericalError
from qstat.log import logger
from qstat.uncertainty import propagate
from qstat.witness import (
    gaussian_boundary,
    nc_witness,
    qng_depth,
    qng_witness,
    rates_to_witness_input,
)


def _p_s(rec: ClickRecord) -> float:
    return rates_to_witness_input(rec).p_s


def _p_c(rec: ClickRecord) -> float:
    return rates_to_witness_input(rec).p_c


def _w_nc(rec: ClickRecord) -> float:
    return nc_witness(rates_to_witness_input(rec))


def _p0(rec: ClickRecord) -> float:
    return probabilities_from_record(rec).p0


def _p1(rec: ClickRecord) -> float:
    return probabilities_from_record(rec).p1


def _p2plus(rec: ClickRecord) -> float:
    return probabilities_from_record(rec).p2plus


def _g2_form_a(rec: ClickRecord) -> float:
    return heralded_g2_from_probs(probabilities_from_record(rec), G2Form.A)


def _g2_form_b(rec: ClickRecord) -> float:
    return heralded_g2_from_probs(probabilities_from_record(rec), G2Form.B)


def _qngd(rec: ClickRecord) -> float:
    return qng_depth(probabilities_from_record(rec)).depth_db


ESTIMATORS: dict[str, Callable[[ClickRecord], float]] = {
    "p_s": _p_s,
    "p_c": _p_c,
    "w_nc": _w_nc,
    "p0": _p0,
    "p1": _p1,
    "p2plus": _p2plus,
    "g2_rate": heralded_g2_from_record,
    "g2_form_a": _g2_form_a,
    "g2_form_b": _g2_form_b,
    "qngd": _qngd,
}

COLUMNS = [
    "intensity",
    *(f"{name}{suffix}" for name in (*ESTIMATORS, "delta_w") for suffix in ("", "_sigma")),
    "a_opt",
    "flag",
]


def _at_counts(
    estimator: Callable[[ClickRecord], float], n_pulses: int, counts: np.ndarray
) -> float:
    return estimator(ClickRecord.from_counts(counts, n_pulses))


def _violation_at(a: float, w_g: float, n_pulses: int, counts: np.ndarray) -> float:
    p = probabilities_from_record(ClickRecord.from_counts(counts, n_pulses))
    return a * p.p0 + p.p1 - w_g


def witness_row(intensity: float, rec: ClickRecord) -> dict[str, float | str]:
    """One report row. Estimators that the record cannot support give NaN and a flag."""
    counts = np.array(rec.counts())
    row: dict[str, float | str] = {"intensity": intensity}
    flags = []

    for name, estimator in ESTIMATORS.items():
        try:
            value = estimator(rec)
        except NumericalError as e:
            row[name] = row[f"{name}_sigma"] = math.nan
            flags.append(f"{name}: {e}")
            continue
        row[name] = value
        if math.isfinite(value):
            row[f"{name}_sigma"] = propagate(partial(_at_counts, estimator, rec.n_pulses), counts)
        else:
            row[f"{name}_sigma"] = math.nan

    try:
        result = qng_witness(probabilities_from_record(rec))
    except NumericalError as e:
        row["delta_w"] = row["delta_w_sigma"] = row["a_opt"] = math.nan
        flags.append(f"delta_w: {e}")
    else:
        # The optimum a is stationary, so only p0 and p1 carry uncertainty.
        w_g, _ = gaussian_boundary(result.a_opt)
        violation = partial(_violation_at, result.a_opt, w_g, rec.n_pulses)
        row["delta_w"] = result.delta_w
        row["delta_w_sigma"] = propagate(violation, counts)
        row["a_opt"] = result.a_opt

    row["flag"] = "; ".join(dict.fromkeys(flags))
    if flags:
        logger.warning(f"Record at I={intensity}: {row['flag']}")
    return {column: row[column] for column in COLUMNS}
