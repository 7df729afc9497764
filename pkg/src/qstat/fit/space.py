from __future__ import annotations

import numpy as np

from qstat.model import ModelParams, PhaseMode


class ParameterSpace:
    """Maps optimizer vectors to ModelParams.

    The free parameters are all ModelParams fields not frozen by the phase
    mode. Free parameters whose bounds collapse to a point are pinned too, so
    the optimizers only see the `active` ones.
    """

    def __init__(self, bounds: dict[str, tuple[float, float]], phase_mode: PhaseMode) -> None:
        frozen = phase_mode.frozen
        self.free = [name for name in ModelParams.names() if name not in frozen]
        self.active = [name for name in self.free if bounds[name][0] < bounds[name][1]]
        self.pinned = {
            **frozen,
            **{name: bounds[name][0] for name in self.free if name not in self.active},
        }
        self.bounds = [bounds[name] for name in self.active]

    @property
    def n_free(self) -> int:
        return len(self.free)

    @property
    def n_active(self) -> int:
        return len(self.active)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    def params(self, z: np.ndarray) -> ModelParams:
        values = dict(zip(self.active, map(float, z), strict=True))
        return ModelParams(**self.pinned, **values)

    def free_vector(self, params: ModelParams) -> np.ndarray:
        values = params.as_dict()
        return np.array([values[name] for name in self.free])

    def active_vector(self, params: ModelParams) -> np.ndarray:
        values = params.as_dict()
        return np.array([values[name] for name in self.active])
