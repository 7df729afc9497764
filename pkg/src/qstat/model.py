"""Generalized two-mode Gaussian state with power-law intensity scaling.

rho_out = D U_BS2 S U_BS1 (rho_th,s (x) rho_th,h) U_BS1^dag S^dag U_BS2^dag D^dag
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from enum import StrEnum
from itertools import pairwise

import numpy as np

from qstat.exceptions import ConfigError, ModelOverflowError
from qstat.fock import (
    MAX_SQUEEZING,
    DensityMatrix,
    FockConfig,
    ModeOperator,
    beamsplitter,
    displacement,
    evolve_mixture,
    squeezer,
    thermal_state,
)
from qstat.log import logger

SIGNAL = 0
HERALD = 1
MODES = ("signal", "herald")


class PhaseMode(StrEnum):
    """Which phases the fit may move.

    FIXED pins phi_sq = pi on both modes and phi_bs1 = 0 (16 free parameters).
    """

    FIXED = "fixed"
    BS1_PHASE = "bs1_phase"
    FULL = "full"

    @property
    def frozen(self) -> dict[str, float]:
        match self:
            case PhaseMode.FIXED:
                return {"phi_sq_signal": math.pi, "phi_sq_herald": math.pi, "phi_bs1": 0.0}
            case PhaseMode.BS1_PHASE:
                return {"phi_sq_signal": math.pi, "phi_sq_herald": math.pi}
            case PhaseMode.FULL:
                return {}


@dataclass(frozen=True)
class ModelParams:
    i0: float = 1.0
    s_th_signal: float = 0.0
    beta_th_signal: float = 0.0
    s_th_herald: float = 0.0
    beta_th_herald: float = 0.0
    s_r_signal: float = 0.0
    beta_r_signal: float = 0.0
    s_r_herald: float = 0.0
    beta_r_herald: float = 0.0
    phi_sq_signal: float = math.pi
    phi_sq_herald: float = math.pi
    s_alpha_signal: float = 0.0
    beta_alpha_signal: float = 0.0
    s_alpha_herald: float = 0.0
    beta_alpha_herald: float = 0.0
    theta_bs1: float = 0.0
    phi_bs1: float = 0.0
    theta_bs2: float = 0.0
    phi_bs2: float = 0.0

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value}")
            if name.startswith("s_") and value < 0:
                raise ConfigError(f"Scale factor {name} must be non-negative, got {value}")
            if name.startswith(("theta_", "phi_")) and not -2 * math.pi < value < 2 * math.pi:
                raise ConfigError(f"Angle {name} must lie in (-2pi, 2pi), got {value}")
        if not self.i0 > 0:
            raise ConfigError(f"Intensity factor must be positive, got {self.i0}")

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class IntensityGrid:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ConfigError("An intensity grid needs at least one point")
        if values[0] <= 0:
            raise ConfigError(f"Intensities must be positive, got {values[0]}")
        if any(b <= a for a, b in pairwise(values)):
            raise ConfigError("Intensities must be strictly increasing")

    @classmethod
    def linspace(cls, i_min: float, i_max: float, points: int) -> IntensityGrid:
        return cls(tuple(np.linspace(i_min, i_max, points)))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ScaledParams:
    """Model quantities at one intensity, indexed by mode (signal, herald)."""

    n_th: tuple[float, float]
    r: tuple[float, float]
    alpha: tuple[float, float]


def power_law(scale: float, exponent: float, x: float) -> float:
    return scale * x**exponent


def scale_params(
    p: ModelParams,
    intensity: float,
    cfg: FockConfig | None = None,
    *,
    normalize: bool = False,
) -> ScaledParams:
    """Evaluate the power laws at one driving intensity.

    n_th = s I^beta, r = s I^beta, |alpha| = s I^(beta/2). With `normalize`,
    I is divided by the intensity factor I0 first. Displacements are real.
    """
    if not intensity > 0:
        raise ConfigError(f"Intensity must be positive, got {intensity}")
    cfg = cfg or FockConfig()
    x = intensity / p.i0 if normalize else intensity

    n_th = (
        power_law(p.s_th_signal, p.beta_th_signal, x),
        power_law(p.s_th_herald, p.beta_th_herald, x),
    )
    r = (power_law(p.s_r_signal, p.beta_r_signal, x), power_law(p.s_r_herald, p.beta_r_herald, x))
    alpha = (
        power_law(p.s_alpha_signal, p.beta_alpha_signal / 2, x),
        power_law(p.s_alpha_herald, p.beta_alpha_herald / 2, x),
    )

    for mode, r_k, alpha_k in zip(MODES, r, alpha, strict=True):
        if r_k > MAX_SQUEEZING:
            raise ModelOverflowError(f"Squeezing {r_k:.3f} on the {mode} mode at I={intensity}")
        if alpha_k**2 > cfg.max_displacement_sq:
            raise ModelOverflowError(
                f"Displacement |alpha|^2={alpha_k**2:.3f} on the {mode} mode at I={intensity}"
            )

    return ScaledParams(n_th=n_th, r=r, alpha=alpha)


def build_state(
    p: ModelParams,
    intensity: float,
    cfg: FockConfig,
    *,
    normalize: bool = False,
) -> DensityMatrix:
    """Thermal -> BS1 -> per-mode squeeze -> BS2 -> per-mode displace."""
    s = scale_params(p, intensity, cfg, normalize=normalize)
    phases = (p.phi_sq_signal, p.phi_sq_herald)

    ops: list[ModeOperator] = []
    if p.theta_bs1:
        ops.append(beamsplitter(p.theta_bs1, p.phi_bs1, (SIGNAL, HERALD), cfg))
    for mode in (SIGNAL, HERALD):
        if s.r[mode]:
            ops.append(squeezer(s.r[mode], phases[mode], mode, cfg))
    if p.theta_bs2:
        ops.append(beamsplitter(p.theta_bs2, p.phi_bs2, (SIGNAL, HERALD), cfg))
    for mode in (SIGNAL, HERALD):
        if s.alpha[mode]:
            ops.append(displacement(s.alpha[mode], mode, cfg))

    # Thermal input is diagonal, so only its basis kets need propagating.
    weights = np.outer(
        thermal_state(s.n_th[SIGNAL], cfg).photon_distribution(),
        thermal_state(s.n_th[HERALD], cfg).photon_distribution(),
    )
    rho = evolve_mixture(weights, ops, cfg.leak_tol)

    if cfg.check_positivity:
        rho.check_positive()
    logger.trace(f"Built state at I={intensity}: trace {rho.trace:.12f}")
    return rho


def mean_photons(rho: DensityMatrix, mode: int) -> float:
    p = rho.photon_distribution()
    others = tuple(axis for axis in range(rho.n_modes) if axis != mode)
    marginal = p.sum(axis=others) if others else p
    return float(np.dot(np.arange(len(marginal)), marginal))


# Optimized parameters of the three measured harmonic combinations H(signal|herald).
PRESETS = {
    "H(11|13)": ModelParams(
        i0=234.91,
        s_th_signal=3.2e-3,
        beta_th_signal=0.52,
        s_th_herald=6.7e-3,
        beta_th_herald=0.12,
        s_r_signal=0.095,
        beta_r_signal=1.18,
        s_r_herald=0.573,
        beta_r_herald=1.60,
        phi_sq_signal=3.150,
        phi_sq_herald=3.142,
        s_alpha_signal=0.881,
        beta_alpha_signal=2.52,
        s_alpha_herald=0.433,
        beta_alpha_herald=1.57,
        theta_bs1=0.410,
        phi_bs1=0.021,
        theta_bs2=1.399,
        phi_bs2=-1.29,
    ),
    "H(11|12)": ModelParams(
        i0=230.00,
        s_th_signal=7.6e-5,
        beta_th_signal=0.56,
        s_th_herald=1.0e-5,
        beta_th_herald=0.60,
        s_r_signal=0.145,
        beta_r_signal=1.29,
        s_r_herald=0.556,
        beta_r_herald=1.79,
        phi_sq_signal=3.142,
        phi_sq_herald=3.144,
        s_alpha_signal=0.711,
        beta_alpha_signal=2.16,
        s_alpha_herald=0.384,
        beta_alpha_herald=1.67,
        theta_bs1=0.486,
        phi_bs1=0.006,
        theta_bs2=1.673,
        phi_bs2=-1.68,
    ),
    "H(12|11)": ModelParams(
        i0=231.65,
        s_th_signal=1.0e-5,
        beta_th_signal=0.52,
        s_th_herald=1.0e-5,
        beta_th_herald=0.54,
        s_r_signal=0.071,
        beta_r_signal=1.18,
        s_r_herald=0.571,
        beta_r_herald=1.75,
        phi_sq_signal=3.132,
        phi_sq_herald=3.132,
        s_alpha_signal=0.864,
        beta_alpha_signal=2.21,
        s_alpha_herald=0.482,
        beta_alpha_herald=1.64,
        theta_bs1=0.509,
        phi_bs1=0.021,
        theta_bs2=1.558,
        phi_bs2=-1.48,
    ),
}


def main() -> None:
    """For testing only."""
    import sys

    from qstat.witness import log_negativity

    name = sys.argv[1] if len(sys.argv) > 1 else "H(12|11)"
    if name not in PRESETS:
        print(f"Unknown combination {name}. F.e. {', '.join(PRESETS)}")
        return

    cfg = FockConfig()
    for intensity in (0.25, 0.5, 0.75, 1.0):
        rho = build_state(PRESETS[name], intensity, cfg)
        n_s, n_h = mean_photons(rho, SIGNAL), mean_photons(rho, HERALD)
        e_n = log_negativity(rho)
        print(f"I={intensity:.2f}  <n_s>={n_s:.4f}  <n_h>={n_h:.4f}  E_N={e_n:.4f}")


if __name__ == "__main__":
    main()
