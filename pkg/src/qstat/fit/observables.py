from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from qstat.exceptions import ConfigError


class ObservableKind(StrEnum):
    HERALDED_G2 = "heralded_g2"
    NC_WITNESS_SIGNAL = "nc_witness_signal"
    NC_WITNESS_HERALD = "nc_witness_herald"
    NC_WITNESS_CROSS = "nc_witness_cross"
    QNG_DEPTH = "qng_depth"
    # Only written by an extended forward run
    DELTA_W = "delta_w"
    LOG_NEGATIVITY = "log_negativity"
    CROSS_G2 = "cross_g2"


FITTED = (
    ObservableKind.HERALDED_G2,
    ObservableKind.NC_WITNESS_SIGNAL,
    ObservableKind.NC_WITNESS_HERALD,
    ObservableKind.NC_WITNESS_CROSS,
    ObservableKind.QNG_DEPTH,
)
EXTENDED = (
    ObservableKind.DELTA_W,
    ObservableKind.LOG_NEGATIVITY,
    ObservableKind.CROSS_G2,
)


def _frozen(values: object) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class ObservableCurve:
    """One observable against mean photon number `x`.

    `intensity` holds the driving intensity of each point when known.
    Undefined points are NaN.
    """

    kind: ObservableKind
    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None
    intensity: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ObservableKind(self.kind))
        for name in ("x", "y", "sigma", "intensity"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(value))

        lengths = {len(a) for a in (self.x, self.y, self.sigma, self.intensity) if a is not None}
        if len(lengths) > 1:
            raise ConfigError(f"Curve {self.kind} has columns of different lengths")
        if self.sigma is not None and np.any(self.sigma[np.isfinite(self.sigma)] <= 0):
            raise ConfigError(f"Curve {self.kind} has non-positive uncertainties")

    def __len__(self) -> int:
        return len(self.x)
