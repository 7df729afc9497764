"""Weighted NRMSE between model and data curves."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from qstat.exceptions import ConfigError
from qstat.fit.config import FitConfig
from qstat.fit.observables import ObservableCurve, ObservableKind

# Loss of unphysical or unrepresentable parameter sets.
INVALID_LOSS = 1e6


def _finite_sorted(curve: ObservableCurve) -> tuple[np.ndarray, np.ndarray]:
    mask = np.isfinite(curve.x) & np.isfinite(curve.y)
    x, y = curve.x[mask], curve.y[mask]
    order = np.lexsort((y, x))
    return x[order], y[order]


def _data_scale(y: np.ndarray) -> float:
    span = float(np.ptp(y))
    if span > 0:
        return span
    return float(np.max(np.abs(y))) or 1.0


def curve_loss(
    model: ObservableCurve,
    data: ObservableCurve,
    endpoint_weight_factor: float,
    range_penalty_factor: float,
) -> float:
    """NRMSE of the model interpolated onto the data, plus the range penalty.

    The first and last data points (in x) weigh `endpoint_weight_factor` times
    more. The penalty is (model range / data range - factor)^2 where positive.
    """
    x, y = _finite_sorted(data)
    if len(x) == 0:
        return 0.0
    model_x, model_y = _finite_sorted(model)
    if len(model_x) == 0:
        return INVALID_LOSS

    predicted = np.interp(x, model_x, model_y)
    weights = np.ones_like(y)
    weights[[0, -1]] = endpoint_weight_factor
    scale = _data_scale(y)
    nrmse = np.sqrt(np.sum(weights * (predicted - y) ** 2) / np.sum(weights)) / scale

    excess = max(0.0, float(np.ptp(predicted)) / scale - range_penalty_factor)
    return float(nrmse + excess**2)


def loss_breakdown(
    model_curves: Mapping[ObservableKind, ObservableCurve],
    data_curves: Mapping[ObservableKind, ObservableCurve],
    cfg: FitConfig,
) -> dict[ObservableKind, float]:
    missing = set(data_curves) - set(model_curves)
    if missing:
        raise ConfigError(f"No model curve for {sorted(missing)}")
    return {
        kind: curve_loss(
            model_curves[kind], data, cfg.endpoint_weight_factor, cfg.range_penalty_factor
        )
        for kind, data in data_curves.items()
    }


def total_loss(breakdown: Mapping[ObservableKind, float], cfg: FitConfig) -> float:
    return float(sum(cfg.weights[kind] * value for kind, value in breakdown.items()))


def loss(
    model_curves: Mapping[ObservableKind, ObservableCurve],
    data_curves: Mapping[ObservableKind, ObservableCurve],
    cfg: FitConfig,
) -> float:
    return total_loss(loss_breakdown(model_curves, data_curves, cfg), cfg)
