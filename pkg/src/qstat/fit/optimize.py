"""Three-stage global fit: random search, differential evolution, dual annealing."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
from scipy.optimize import differential_evolution, dual_annealing

from qstat.config import environment
from qstat.exceptions import ConfigError, NumericalError
from qstat.fit.config import FitConfig
from qstat.fit.forward import forward
from qstat.fit.loss import INVALID_LOSS, loss_breakdown, total_loss
from qstat.fit.observables import EXTENDED, ObservableCurve, ObservableKind
from qstat.fit.space import ParameterSpace
from qstat.log import logger
from qstat.model import ModelParams

MIN_IMPROVEMENT = 1e-6
# scipy needs at least five population members.
MIN_POPULATION = 5

Mapper = Callable[[Callable[[np.ndarray], float], Iterable[np.ndarray]], Iterable[float]]


@dataclass(frozen=True)
class StageRecord:
    name: str
    best_loss: float
    evaluations: int


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    loss: float
    per_observable_loss: dict[ObservableKind, float]
    stage_trace: tuple[StageRecord, ...]
    # False when annealing improved the loss by less than MIN_IMPROVEMENT
    converged: bool
    seed: int
    n_free: int


class Objective:
    """Loss of an optimizer vector. Picklable, so population members can be
    evaluated in worker processes."""

    def __init__(
        self,
        data: Mapping[ObservableKind, ObservableCurve],
        cfg: FitConfig,
        space: ParameterSpace,
    ) -> None:
        self.data = dict(data)
        self.cfg = cfg
        self.space = space
        self.extended = any(kind in EXTENDED for kind in self.data)

    def breakdown(self, z: np.ndarray) -> dict[ObservableKind, float]:
        params = self.space.params(z)
        curves = forward(
            params,
            self.cfg.grid,
            self.cfg.setup,
            self.cfg.fock,
            normalize=self.cfg.normalize_intensity,
            extended=self.extended,
        )
        return loss_breakdown(curves, self.data, self.cfg)

    def __call__(self, z: np.ndarray) -> float:
        try:
            value = total_loss(self.breakdown(z), self.cfg)
        except (NumericalError, ConfigError) as e:
            logger.trace(f"Invalid parameters: {e}")
            return INVALID_LOSS
        return value if np.isfinite(value) else INVALID_LOSS


@contextmanager
def _mapper(threads: int) -> Iterator[Mapper]:
    if threads == 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as executor:
        yield executor.map


def _uniform(space: ParameterSpace, rng: np.random.Generator, count: int) -> np.ndarray:
    return space.lower + (space.upper - space.lower) * rng.random((count, space.n_active))


def _random_search(
    objective: Objective,
    space: ParameterSpace,
    cfg: FitConfig,
    rng: np.random.Generator,
    mapper: Mapper,
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform draws within the bounds, returned sorted by loss."""
    draws = _uniform(space, rng, cfg.random_draws)
    losses = np.array(list(mapper(objective, draws)))
    order = np.argsort(losses, kind="stable")
    return draws[order], losses[order]


def fit(data: Mapping[ObservableKind, ObservableCurve], cfg: FitConfig) -> FitResult:
    """Fit the model to at least two observable curves. Reproducible given cfg.seed."""
    data = {ObservableKind(kind): curve for kind, curve in data.items()}
    if len(data) < 2:
        raise ConfigError(f"A fit needs at least two observable kinds, got {sorted(data)}")

    space = ParameterSpace(cfg.bounds, cfg.phase_mode)
    objective = Objective(data, cfg, space)
    threads = cfg.threads or environment().threads
    logger.info(
        f"Fitting {sorted(data)}: {space.n_free} free parameters, {space.n_active} active, "
        f"seed {cfg.seed}, {threads} worker(s)"
    )

    if space.n_active == 0:
        logger.warning("Every parameter is pinned, evaluating the single point")
        z = np.empty(0)
        value = objective(z)
        trace = (StageRecord("pinned", value, 1),)
        return _result(objective, z, value, trace, cfg, converged=True)

    stage_seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    trace = []
    with _mapper(threads) as mapper:
        # Stage 1
        rng = np.random.default_rng(stage_seeds[0])
        if cfg.random_draws > 0:
            draws, losses = _random_search(objective, space, cfg, rng, mapper)
        else:
            draws = _uniform(space, rng, 1)
            losses = np.array([objective(draws[0])])
        best_z, best = draws[0], float(losses[0])
        trace.append(StageRecord("random_search", best, len(losses)))
        logger.info(f"Random search: best loss {best:.6g} of {len(losses)} draws")

        # Stage 2
        rng = np.random.default_rng(stage_seeds[1])
        if cfg.generations > 0:
            size = max(MIN_POPULATION, cfg.population_size * space.n_active)
            top = draws[: min(cfg.top_k, size)]
            fill = _uniform(space, rng, size - len(top))
            result = differential_evolution(
                objective,
                space.bounds,
                strategy="rand1bin",
                maxiter=cfg.generations,
                mutation=(0.5, 1.0),
                recombination=0.7,
                init=np.vstack([top, fill]),
                updating="deferred",
                workers=mapper,
                polish=False,
                tol=0,
                rng=rng,
            )
            if result.fun <= best:
                best_z, best = np.asarray(result.x), float(result.fun)
            trace.append(StageRecord("differential_evolution", best, int(result.nfev)))
            logger.info(f"Differential evolution: best loss {best:.6g}, {result.nit} generations")
        before_annealing = best

    # Stage 3
    if cfg.annealing_steps > 0:
        local_budget = max(50, cfg.annealing_steps // 5)
        result = dual_annealing(
            objective,
            space.bounds,
            x0=best_z,
            maxfun=cfg.annealing_steps,
            minimizer_kwargs={
                "method": "Powell",
                "bounds": space.bounds,
                "options": {"maxfev": local_budget},
            },
            rng=np.random.default_rng(stage_seeds[2]),
        )
        if result.fun <= best:
            best_z, best = np.asarray(result.x), float(result.fun)
        trace.append(StageRecord("dual_annealing", best, int(result.nfev)))
        logger.info(f"Dual annealing: best loss {best:.6g}")

    converged = before_annealing - best >= MIN_IMPROVEMENT
    if not converged:
        logger.warning(
            f"Annealing improved the loss by {before_annealing - best:.3g} < {MIN_IMPROVEMENT}"
        )
    return _result(objective, best_z, best, tuple(trace), cfg, converged=converged)


def _result(
    objective: Objective,
    z: np.ndarray,
    value: float,
    trace: tuple[StageRecord, ...],
    cfg: FitConfig,
    *,
    converged: bool,
) -> FitResult:
    params = objective.space.params(z)
    try:
        breakdown = objective.breakdown(z)
    except NumericalError:
        breakdown = {kind: INVALID_LOSS for kind in objective.data}
    logger.success(f"Fit finished with loss {value:.6g}")
    return FitResult(
        params=params,
        loss=total_loss(breakdown, cfg),
        per_observable_loss=breakdown,
        stage_trace=trace,
        converged=converged,
        seed=cfg.seed,
        n_free=objective.space.n_free,
    )
