"""Model -> detection -> estimators, evaluated on an intensity grid."""

from __future__ import annotations

import math

from qstat.detect import (
    DetectorSetup,
    PairConfig,
    heralded_g2_from_record,
    pair_clicks,
    probabilities_from_record,
    simulate_record,
    unheralded_g2,
)
from qstat.exceptions import DegenerateRecordError
from qstat.fit.observables import EXTENDED, FITTED, ObservableCurve, ObservableKind
from qstat.fock import DensityMatrix, FockConfig
from qstat.log import logger
from qstat.model import HERALD, SIGNAL, IntensityGrid, ModelParams, build_state, mean_photons
from qstat.witness import NcWitnessInput, log_negativity, nc_witness, qng_depth, qng_witness

PAIRS = {
    ObservableKind.NC_WITNESS_SIGNAL: PairConfig.SIGNAL,
    ObservableKind.NC_WITNESS_HERALD: PairConfig.HERALD,
    ObservableKind.NC_WITNESS_CROSS: PairConfig.CROSS,
}


def _observe(
    rho: DensityMatrix, setup: DetectorSetup, kinds: tuple[ObservableKind, ...]
) -> dict[ObservableKind, float]:
    values = dict.fromkeys(kinds, math.nan)
    record = simulate_record(rho, setup)

    for kind, config in PAIRS.items():
        if kind in kinds:
            p_s, p_c = pair_clicks(rho, setup, config)
            values[kind] = nc_witness(NcWitnessInput(p_s=p_s, p_c=p_c))

    try:
        values[ObservableKind.HERALDED_G2] = heralded_g2_from_record(record)
    except DegenerateRecordError as e:
        logger.trace(f"heralded g2 undefined: {e}")

    try:
        probabilities = probabilities_from_record(record)
        values[ObservableKind.QNG_DEPTH] = qng_depth(probabilities).depth_db
        if ObservableKind.DELTA_W in kinds:
            values[ObservableKind.DELTA_W] = qng_witness(probabilities).delta_w
    except DegenerateRecordError as e:
        logger.trace(f"photon probabilities undefined: {e}")

    if ObservableKind.LOG_NEGATIVITY in kinds:
        values[ObservableKind.LOG_NEGATIVITY] = log_negativity(rho)
    if ObservableKind.CROSS_G2 in kinds:
        try:
            values[ObservableKind.CROSS_G2] = unheralded_g2(rho, SIGNAL, HERALD)
        except DegenerateRecordError as e:
            logger.trace(f"cross g2 undefined: {e}")
    return {kind: values[kind] for kind in kinds}


def forward(
    params: ModelParams,
    grid: IntensityGrid,
    setup: DetectorSetup,
    cfg: FockConfig | None = None,
    *,
    normalize: bool = False,
    extended: bool = False,
) -> dict[ObservableKind, ObservableCurve]:
    """All fitted observables, plus the EXTENDED kinds when `extended`.

    The x-axis is the mean photon number of the signal mode, or of the herald
    mode for the herald witness. Undefined points are NaN. Numerical errors of
    the state construction propagate.
    """
    cfg = cfg or FockConfig()
    kinds = (*FITTED, *EXTENDED) if extended else FITTED

    columns: dict[str, list[float]] = {"signal": [], "herald": []}
    rows = []
    for intensity in grid.values:
        rho = build_state(params, intensity, cfg, normalize=normalize)
        columns["signal"].append(mean_photons(rho, SIGNAL))
        columns["herald"].append(mean_photons(rho, HERALD))
        rows.append(_observe(rho, setup, kinds))

    curves = {}
    for kind in kinds:
        x = columns["herald"] if kind is ObservableKind.NC_WITNESS_HERALD else columns["signal"]
        y = [row[kind] for row in rows]
        curves[kind] = ObservableCurve(kind, x, y, intensity=grid.values)
    return curves
