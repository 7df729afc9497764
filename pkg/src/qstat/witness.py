"""Non-classicality and quantum non-Gaussianity quantifiers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cache

import numpy as np
from scipy.optimize import minimize_scalar

from qstat.detect import ClickRecord, PhotonProbabilities
from qstat.exceptions import ConfigError, DegenerateRecordError, NumericalError
from qstat.fock import DensityMatrix, partial_transpose, trace_norm
from qstat.log import logger

R_MAX = 2.0
R_STEP = 1e-3
A_HALF_WIDTH = 50.0
A_STEP = 0.05
MAX_WIDENINGS = 8
REFINE_XATOL = 1e-8
NEGATIVITY_CLAMP = -1e-9


@dataclass(frozen=True)
class NcWitnessInput:
    p_s: float
    p_c: float

    def __post_init__(self) -> None:
        if self.p_s < 0 or self.p_c < 0 or self.p_s + self.p_c > 1 + 1e-12:
            raise ConfigError(f"Invalid click probabilities P_S={self.p_s}, P_C={self.p_c}")


@dataclass(frozen=True)
class QngWitnessResult:
    a_opt: float
    w: float
    w_g: float
    delta_w: float
    r_boundary: float


@dataclass(frozen=True)
class QngDepthResult:
    t_min: float
    # inf when the state has no multiphoton component
    depth_db: float


def nc_witness(witness_input: NcWitnessInput) -> float:
    """P_S - 2 (sqrt(P_C) - P_C); positive values exclude mixtures of coherent states."""
    p_c = witness_input.p_c
    return witness_input.p_s - 2 * (math.sqrt(p_c) - p_c)


def rates_to_witness_input(rec: ClickRecord) -> NcWitnessInput:
    singles = rec.rs_a + rec.rs_b - 2 * rec.rc
    if singles < 0:
        raise DegenerateRecordError("RSA + RSB < 2 RC gives a negative P_S")
    return NcWitnessInput(p_s=singles / rec.n_pulses, p_c=rec.rc / rec.n_pulses)


def _family(r: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """p0 and p1 of the extremal squeezed coherent states, d^2 = (e^{4r} - 1) / 4."""
    d_sq = (np.exp(4 * np.asarray(r)) - 1) / 4
    envelope = np.exp(-d_sq * (1 - np.tanh(r)))
    p0 = envelope / np.cosh(r)
    p1 = d_sq * envelope / np.cosh(r) ** 3
    return p0, p1


@cache
def _boundary_grid() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = np.linspace(0, R_MAX, round(R_MAX / R_STEP) + 1)
    p0, p1 = _family(r)
    for array in (r, p0, p1):
        array.flags.writeable = False
    return r, p0, p1


def gaussian_boundary(a: float) -> tuple[float, float]:
    """(W_G(a), r*): the largest a p0 + p1 reached by a Gaussian state."""
    if not math.isfinite(a):
        raise ConfigError(f"The witness parameter must be finite, got {a}")
    r, p0, p1 = _boundary_grid()
    values = a * p0 + p1
    i = int(np.argmax(values))

    lo, hi = r[max(i - 1, 0)], r[min(i + 1, len(r) - 1)]

    def objective(x: float) -> float:
        q0, q1 = _family(x)
        return -float(a * q0 + q1)

    refined = minimize_scalar(
        objective, bounds=(lo, hi), method="bounded", options={"xatol": REFINE_XATOL}
    )
    if -refined.fun > values[i]:
        return float(-refined.fun), float(refined.x)
    return float(values[i]), float(r[i])


def _boundary_on(a: np.ndarray) -> np.ndarray:
    """W_G on a whole a-grid, without refinement."""
    _, p0, p1 = _boundary_grid()
    return np.max(a[:, None] * p0[None, :] + p1[None, :], axis=1)


def qng_witness(p: PhotonProbabilities) -> QngWitnessResult:
    """Maximize W(a) - W_G(a) with W(a) = a p0 + p1.

    W_G is convex in a, so the violation is concave and one grid pass plus a
    bracketed refinement finds the optimum. The a-range doubles while the grid
    optimum sits on its edge.
    """
    half_width = A_HALF_WIDTH
    points = round(2 * A_HALF_WIDTH / A_STEP) + 1
    for _ in range(MAX_WIDENINGS + 1):
        a = np.linspace(-half_width, half_width, points)
        violation = a * p.p0 + p.p1 - _boundary_on(a)
        i = int(np.argmax(violation))
        if 0 < i < len(a) - 1:
            break
        logger.debug(f"Witness optimum on the edge of [-{half_width:g}, {half_width:g}]")
        half_width *= 2
    else:
        logger.warning(f"Witness optimum still on the edge at |a| = {half_width / 2:g}")

    lo, hi = a[max(i - 1, 0)], a[min(i + 1, len(a) - 1)]

    def objective(x: float) -> float:
        return -(x * p.p0 + p.p1 - gaussian_boundary(x)[0])

    refined = minimize_scalar(
        objective, bounds=(lo, hi), method="bounded", options={"xatol": REFINE_XATOL}
    )
    a_opt = float(refined.x) if -refined.fun >= violation[i] else float(a[i])

    w = a_opt * p.p0 + p.p1
    w_g, r_star = gaussian_boundary(a_opt)
    return QngWitnessResult(a_opt=a_opt, w=w, w_g=w_g, delta_w=w - w_g, r_boundary=r_star)


def qng_depth(p: PhotonProbabilities) -> QngDepthResult:
    """Attenuation in dB that keeps the state certifiable, from T_min = 3 p2+ / (2 p1^3)."""
    if p.p1 <= 0:
        raise DegenerateRecordError("QNG depth needs p1 > 0")
    t_min = 1.5 * p.p2plus / p.p1**3
    if t_min <= 0:
        return QngDepthResult(t_min=0.0, depth_db=math.inf)
    return QngDepthResult(t_min=t_min, depth_db=-10 * math.log10(t_min))


def log_negativity(rho: DensityMatrix) -> float:
    """log2 of the trace norm of the partial transpose, for the normalized state."""
    norm = trace_norm(partial_transpose(rho, 1)) / rho.trace
    value = math.log2(norm)
    if value < NEGATIVITY_CLAMP:
        raise NumericalError(f"Negative log-negativity {value:.3e}")
    return max(value, 0.0)


def main() -> None:
    """For testing only."""
    for a in (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0):
        w_g, r_star = gaussian_boundary(a)
        print(f"a={a:+.2f}  W_G={w_g:.8f}  r*={r_star:.6f}")


if __name__ == "__main__":
    main()
