"""Run configuration from a TOML file (`--config`)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeVar

from qstat.config import from_section, read_toml
from qstat.detect import DetectorSetup
from qstat.exceptions import ConfigError
from qstat.fit import FitConfig, ObservableKind
from qstat.fit.config import DEFAULT_GRID
from qstat.fock import FockConfig
from qstat.log import logger
from qstat.model import IntensityGrid, ModelParams, PhaseMode

T = TypeVar("T")

SECTIONS = {
    "fock",
    "detector",
    "grid",
    "model",
    "fit",
    "bounds",
    "weights",
    "random_search",
    "differential_evolution",
    "annealing",
}


@dataclass(frozen=True)
class GridSection:
    i_min: float = 0.2
    i_max: float = 0.7
    points: int = 11
    values: list[float] | None = None

    def grid(self) -> IntensityGrid:
        if self.values is not None:
            return IntensityGrid(tuple(self.values))
        return IntensityGrid.linspace(self.i_min, self.i_max, self.points)


@dataclass(frozen=True)
class ModelSection:
    phase_mode: str = PhaseMode.FIXED
    normalize_intensity: bool = False


@dataclass(frozen=True)
class FitSection:
    endpoint_weight_factor: float = 3.0
    range_penalty_factor: float = 2.0
    threads: int | None = None


@dataclass(frozen=True)
class RandomSearchSection:
    draws: int = 2000
    top_k: int = 50


@dataclass(frozen=True)
class EvolutionSection:
    population_size: int = 15
    generations: int = 60


@dataclass(frozen=True)
class AnnealingSection:
    steps: int = 5000


@dataclass(frozen=True)
class RunConfig:
    # None: the analysis defaults, or the lighter fit defaults inside a fit
    fock: FockConfig | None = None
    detector: DetectorSetup = field(default_factory=DetectorSetup)
    grid: IntensityGrid = DEFAULT_GRID
    model: ModelSection = field(default_factory=ModelSection)
    fit: FitSection = field(default_factory=FitSection)
    # Only the bounds given in the file
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    weights: dict[str, float] = field(default_factory=dict)
    random_search: RandomSearchSection = field(default_factory=RandomSearchSection)
    evolution: EvolutionSection = field(default_factory=EvolutionSection)
    annealing: AnnealingSection = field(default_factory=AnnealingSection)

    @property
    def phase_mode(self) -> PhaseMode:
        return PhaseMode(self.model.phase_mode)

    def check_bounds(self, params: ModelParams) -> None:
        values = params.as_dict()
        for name, (lo, hi) in self.bounds.items():
            if not lo <= values[name] <= hi:
                raise ConfigError(f"{name}={values[name]} lies outside its bounds [{lo}, {hi}]")

    def fit_config(self, seed: int) -> FitConfig:
        kwargs = {"fock": self.fock} if self.fock is not None else {}
        return FitConfig(
            seed=seed,
            bounds=self.bounds,
            weights=self.weights,
            endpoint_weight_factor=self.fit.endpoint_weight_factor,
            range_penalty_factor=self.fit.range_penalty_factor,
            random_draws=self.random_search.draws,
            top_k=self.random_search.top_k,
            population_size=self.evolution.population_size,
            generations=self.evolution.generations,
            annealing_steps=self.annealing.steps,
            phase_mode=self.phase_mode,
            normalize_intensity=self.model.normalize_intensity,
            grid=self.grid,
            setup=self.detector,
            threads=self.fit.threads,
            **kwargs,
        )


def _bounds(table: dict[str, Any]) -> dict[str, tuple[float, float]]:
    unknown = set(table) - set(ModelParams.names())
    if unknown:
        raise ConfigError(f"Unknown key(s) {sorted(unknown)} in [bounds]")
    bounds = {}
    for name, pair in table.items():
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"[bounds] {name} must be a [low, high] pair")
        bounds[name] = (float(pair[0]), float(pair[1]))
    return bounds


def _weights(table: dict[str, Any]) -> dict[str, float]:
    kinds = {kind.value for kind in ObservableKind}
    unknown = set(table) - kinds
    if unknown:
        raise ConfigError(f"Unknown observable(s) {sorted(unknown)} in [weights]")
    return {kind: float(weight) for kind, weight in table.items()}


def load_run_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    table = read_toml(path)
    unknown = set(table) - SECTIONS
    if unknown:
        raise ConfigError(f"Unknown section(s) {sorted(unknown)} in {path}")

    def section(name: str) -> dict[str, Any]:
        value = table.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(f"[{name}] must be a table")
        return value

    def parsed(cls: type[T], name: str) -> T:
        return from_section(cls, section(name), name)

    config = RunConfig(
        fock=parsed(FockConfig, "fock") if "fock" in table else None,
        detector=parsed(DetectorSetup, "detector"),
        grid=parsed(GridSection, "grid").grid(),
        model=parsed(ModelSection, "model"),
        fit=parsed(FitSection, "fit"),
        bounds=_bounds(section("bounds")),
        weights=_weights(section("weights")),
        random_search=parsed(RandomSearchSection, "random_search"),
        evolution=parsed(EvolutionSection, "differential_evolution"),
        annealing=parsed(AnnealingSection, "annealing"),
    )
    if config.model.phase_mode not in {mode.value for mode in PhaseMode}:
        raise ConfigError(f"Unknown phase_mode {config.model.phase_mode!r} in [model]")
    logger.debug(f"Loaded run configuration from {path}")
    return config
