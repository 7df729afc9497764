from __future__ import annotations

import math
from dataclasses import dataclass, field

from qstat.detect import DetectorSetup
from qstat.exceptions import ConfigError
from qstat.fit.observables import EXTENDED, FITTED, ObservableKind
from qstat.fock import FockConfig
from qstat.model import IntensityGrid, ModelParams, PhaseMode

# Smaller than the analysis defaults: every loss evaluation builds a full grid of states.
FIT_FOCK = FockConfig(n_max=16, n_work=32, leak_tol=1e-4, check_positivity=False)

DEFAULT_GRID = IntensityGrid.linspace(0.2, 0.7, 11)

# Around the optimized values of the measured harmonic combinations.
DEFAULT_BOUNDS: dict[str, tuple[float, float]] = {
    "i0": (1.0, 1.0),
    "s_th_signal": (0.0, 0.01),
    "beta_th_signal": (0.0, 2.0),
    "s_th_herald": (0.0, 0.01),
    "beta_th_herald": (0.0, 2.0),
    "s_r_signal": (0.0, 0.8),
    "beta_r_signal": (0.5, 2.5),
    "s_r_herald": (0.0, 0.8),
    "beta_r_herald": (0.5, 2.5),
    "phi_sq_signal": (math.pi - 0.5, math.pi + 0.5),
    "phi_sq_herald": (math.pi - 0.5, math.pi + 0.5),
    "s_alpha_signal": (0.0, 1.0),
    "beta_alpha_signal": (0.5, 3.0),
    "s_alpha_herald": (0.0, 1.0),
    "beta_alpha_herald": (0.5, 3.0),
    "theta_bs1": (0.0, 3.0),
    "phi_bs1": (-1.0, 1.0),
    "theta_bs2": (0.0, 3.0),
    "phi_bs2": (-3.1, 3.1),
}


def _default_weights() -> dict[ObservableKind, float]:
    return {kind: 1.0 for kind in (*FITTED, *EXTENDED)}


@dataclass(frozen=True)
class FitConfig:
    seed: int
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    weights: dict[ObservableKind, float] = field(default_factory=_default_weights)
    endpoint_weight_factor: float = 3.0
    range_penalty_factor: float = 2.0
    random_draws: int = 2000
    top_k: int = 50
    population_size: int = 15
    generations: int = 60
    annealing_steps: int = 5000
    phase_mode: PhaseMode = PhaseMode.FIXED
    normalize_intensity: bool = False
    grid: IntensityGrid = DEFAULT_GRID
    setup: DetectorSetup = field(default_factory=DetectorSetup)
    fock: FockConfig = FIT_FOCK
    # None: take QSTAT_THREADS
    threads: int | None = None

    def __post_init__(self) -> None:
        unknown = set(self.bounds) - set(ModelParams.names())
        if unknown:
            raise ConfigError(f"Bounds for unknown parameter(s) {sorted(unknown)}")
        bounds = {**DEFAULT_BOUNDS, **{k: tuple(map(float, v)) for k, v in self.bounds.items()}}
        for name, (lo, hi) in bounds.items():
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ConfigError(f"Bounds of {name} must be finite and ordered, got {(lo, hi)}")
        object.__setattr__(self, "bounds", bounds)

        try:
            given = {ObservableKind(k): float(w) for k, w in self.weights.items()}
        except ValueError as e:
            raise ConfigError(f"Invalid observable weights: {e}") from e
        weights = {**_default_weights(), **given}
        if any(w < 0 for w in weights.values()):
            raise ConfigError("Observable weights must be non-negative")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "phase_mode", PhaseMode(self.phase_mode))

        if self.endpoint_weight_factor <= 0 or self.range_penalty_factor <= 0:
            raise ConfigError("Endpoint and range penalty factors must be positive")
        budgets = ("random_draws", "top_k", "population_size", "generations", "annealing_steps")
        for name in budgets:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.population_size < 1:
            raise ConfigError("population_size must be at least 1")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
