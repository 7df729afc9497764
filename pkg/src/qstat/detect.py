"""On/off click detection: a herald detector H on the herald mode and a splitter
feeding detectors A and B from the signal mode.

Photons are routed independently, so the probability that a set of detectors
stays dark is a weighted sum over the joint photon-number distribution. Every
joint outcome follows by inclusion-exclusion over those no-click sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from qstat.exceptions import ConfigError, DegenerateRecordError, HeraldError
from qstat.fock import DensityMatrix
from qstat.log import logger

PROBABILITY_TOL = 1e-12
# Relative slack on record invariants, expectation-mode counts are floats.
COUNT_TOL = 1e-9


@dataclass(frozen=True)
class DetectorSetup:
    eta_h: float = 1.0
    eta_a: float = 1.0
    eta_b: float = 1.0
    t_split: float = 0.5
    n_pulses: int = 10**7

    def __post_init__(self) -> None:
        for name in ("eta_h", "eta_a", "eta_b"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigError(f"Efficiency {name} must lie in [0, 1], got {value}")
        if not 0 < self.t_split < 1:
            raise ConfigError(f"Splitter transmittance must lie in (0, 1), got {self.t_split}")
        if self.n_pulses < 1:
            raise ConfigError(f"n_pulses must be at least 1, got {self.n_pulses}")


@dataclass(frozen=True)
class ClickRecord:
    """Event counts of one measurement run.

    r1a, r1b count H&A and H&B including threefold events, r2 counts H&A&B.
    rs_a, rs_b and rc are the unheralded A, B and A&B counts.
    """

    r0: float
    r1a: float
    r1b: float
    r2: float
    rs_a: float
    rs_b: float
    rc: float
    n_pulses: int

    def __post_init__(self) -> None:
        counts = self.counts()
        if any(c < 0 for c in counts):
            raise ConfigError(f"Counts must be non-negative, got {counts}")
        if self.n_pulses < 1:
            raise ConfigError(f"n_pulses must be at least 1, got {self.n_pulses}")
        slack = COUNT_TOL * max(self.n_pulses, 1)
        if self.r2 > min(self.r1a, self.r1b) + slack:
            raise ConfigError("Threefold count exceeds a twofold count")
        if self.r1a + self.r1b - self.r2 > self.r0 + slack:
            raise ConfigError("Heralded coincidences exceed the herald count")
        if self.rc > min(self.rs_a, self.rs_b) + slack:
            raise ConfigError("Coincidence count exceeds a singles count")
        if max(self.r0, self.rs_a, self.rs_b) > self.n_pulses + slack:
            raise ConfigError("More events than pulses")

    def counts(self) -> tuple[float, ...]:
        """The seven rates in file order (R0, R1A, R1B, R2, RSA, RSB, RC)."""
        return (self.r0, self.r1a, self.r1b, self.r2, self.rs_a, self.rs_b, self.rc)

    @classmethod
    def from_counts(cls, counts: np.ndarray | tuple[float, ...], n_pulses: int) -> ClickRecord:
        return cls(*(float(c) for c in counts), n_pulses=n_pulses)


@dataclass(frozen=True)
class PhotonProbabilities:
    p0: float
    p1: float
    p2plus: float
    t_est: float | None = None

    def __post_init__(self) -> None:
        for name in ("p0", "p1", "p2plus"):
            value = getattr(self, name)
            if not -PROBABILITY_TOL <= value <= 1 + PROBABILITY_TOL:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        total = self.p0 + self.p1 + self.p2plus
        if abs(total - 1) > PROBABILITY_TOL:
            raise ConfigError(f"Probabilities sum to {total}, not 1")

    @classmethod
    def from_p0_p1(cls, p0: float, p1: float, t_est: float | None = None) -> PhotonProbabilities:
        return cls(p0=p0, p1=p1, p2plus=1 - p0 - p1, t_est=t_est)


@dataclass(frozen=True, eq=False)
class ClickDistribution:
    """Joint on/off probabilities indexed [herald, a, b]; 1 means click."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        if self.probs.shape != (2, 2, 2):
            raise ValueError("Expected a 2x2x2 outcome table")
        self.probs.flags.writeable = False

    @property
    def herald(self) -> float:
        return float(self.probs[1].sum())

    @property
    def herald_a(self) -> float:
        return float(self.probs[1, 1].sum())

    @property
    def herald_b(self) -> float:
        return float(self.probs[1, :, 1].sum())

    @property
    def threefold(self) -> float:
        return float(self.probs[1, 1, 1])

    @property
    def single_a(self) -> float:
        return float(self.probs[:, 1].sum())

    @property
    def single_b(self) -> float:
        return float(self.probs[:, :, 1].sum())

    @property
    def coincidence(self) -> float:
        return float(self.probs[:, 1, 1].sum())

    def events(self) -> np.ndarray:
        """The seven record events, in ClickRecord order."""
        return np.array(
            [
                self.herald,
                self.herald_a,
                self.herald_b,
                self.threefold,
                self.single_a,
                self.single_b,
                self.coincidence,
            ]
        )


def _no_click_weights(cutoff: int, efficiency: float) -> np.ndarray:
    """(1 - eta)^n: probability that n photons all miss a detector."""
    return (1 - efficiency) ** np.arange(cutoff + 1)


def _joint_from_dark(dark: dict[tuple[int, ...], float], n_detectors: int) -> np.ndarray:
    """Exact outcome probabilities from the no-click probabilities of every subset.

    `dark[S]` is the probability that the detectors in S (given as a tuple of
    0/1 flags) all stay dark. P(clicks exactly on C) = sum_{U in C} (-1)^|U| Q(not C + U).
    """
    joint = np.zeros((2,) * n_detectors)
    for outcome in itertools.product((0, 1), repeat=n_detectors):
        clicked = [i for i, c in enumerate(outcome) if c]
        total = 0.0
        for size in range(len(clicked) + 1):
            for subset in itertools.combinations(clicked, size):
                flags = tuple(1 if (not c or i in subset) else 0 for i, c in enumerate(outcome))
                total += (-1) ** size * dark[flags]
        joint[outcome] = total
    return joint


def click_probabilities(rho: DensityMatrix, setup: DetectorSetup) -> ClickDistribution:
    """Joint distribution over (H, A, B) for a two-mode state (signal, herald)."""
    if rho.n_modes != 2:
        raise ConfigError("click_probabilities expects a two-mode state")
    p = rho.photon_distribution()
    eff_a = setup.t_split * setup.eta_a
    eff_b = (1 - setup.t_split) * setup.eta_b

    dark = {}
    for flags in itertools.product((0, 1), repeat=3):
        watch_h, watch_a, watch_b = flags
        signal = _no_click_weights(rho.dims[0], watch_a * eff_a + watch_b * eff_b)
        herald = _no_click_weights(rho.dims[1], watch_h * setup.eta_h)
        dark[flags] = float(signal @ p @ herald)

    joint = np.clip(_joint_from_dark(dark, 3), 0, None)
    total = joint.sum()
    logger.trace(f"Click table normalization {total:.12f}")
    return ClickDistribution(joint / total)


def simulate_record(
    rho: DensityMatrix,
    setup: DetectorSetup,
    rng: np.random.Generator | None = None,
) -> ClickRecord:
    """Expected counts, or one multinomial draw over the 8 outcomes when `rng` is given."""
    dist = click_probabilities(rho, setup)
    if rng is None:
        counts = dist.events() * setup.n_pulses
        return ClickRecord.from_counts(counts, setup.n_pulses)

    sample = rng.multinomial(setup.n_pulses, dist.probs.ravel()).reshape(2, 2, 2)
    sampled = ClickDistribution(sample.astype(float))
    return ClickRecord.from_counts(np.rint(sampled.events()), setup.n_pulses)


def probabilities_from_record(rec: ClickRecord) -> PhotonProbabilities:
    """p0, p1 and p2+ of the heralded state from heralded coincidence rates.

    The threefold rate is weighted by (T^2 + (1-T)^2) / (2T(1-T)) with the
    splitter transmittance estimated as T = R1A / (R1A + R1B).
    """
    if rec.r0 <= 0:
        raise DegenerateRecordError("No herald events")
    if rec.r1a + rec.r1b <= 0:
        raise DegenerateRecordError("No heralded coincidences, the transmittance is undefined")

    t_est = rec.r1a / (rec.r1a + rec.r1b)
    p0 = 1 - (rec.r1a + rec.r1b + rec.r2) / rec.r0
    if rec.r2 == 0:
        p1 = (rec.r1a + rec.r1b) / rec.r0
    else:
        if t_est in (0, 1):
            raise DegenerateRecordError("Threefold events with one silent signal arm")
        correction = (t_est**2 + (1 - t_est) ** 2) / (2 * t_est * (1 - t_est))
        p1 = (rec.r1a + rec.r1b) / rec.r0 - correction * rec.r2 / rec.r0

    if not (0 <= p0 <= 1 and 0 <= p1 <= 1 and p0 + p1 <= 1):
        raise DegenerateRecordError(f"Record gives p0={p0:.6g}, p1={p1:.6g}")
    return PhotonProbabilities.from_p0_p1(p0, p1, t_est)


class G2Form(StrEnum):
    A = "a"  # 2 p2+ / p1^2
    B = "b"  # 2 (1 - p0 - p1) / (2 (1 - p0) - p1)^2


def heralded_g2_from_probs(p: PhotonProbabilities, form: G2Form = G2Form.A) -> float:
    match form:
        case G2Form.A:
            if p.p1 <= 0:
                raise DegenerateRecordError("p1 = 0")
            return 2 * p.p2plus / p.p1**2
        case G2Form.B:
            denominator = 2 * (1 - p.p0) - p.p1
            if denominator == 0:
                raise DegenerateRecordError("2 (1 - p0) = p1")
            return 2 * (1 - p.p0 - p.p1) / denominator**2


def heralded_g2_from_record(rec: ClickRecord) -> float:
    if rec.r1a <= 0 or rec.r1b <= 0:
        raise DegenerateRecordError("No heralded coincidences on one signal arm")
    return rec.r2 * rec.r0 / (rec.r1a * rec.r1b)


def unheralded_g2(rho: DensityMatrix, mode_i: int, mode_j: int) -> float:
    """Normally ordered <a_i^dag a_j^dag a_i a_j> / (<n_i> <n_j>)."""
    p = rho.photon_distribution()
    grids = np.meshgrid(*[np.arange(s) for s in p.shape], indexing="ij")
    n_i, n_j = grids[mode_i], grids[mode_j]
    mean_i, mean_j = np.sum(p * n_i), np.sum(p * n_j)
    if mean_i <= 0 or mean_j <= 0:
        raise DegenerateRecordError("g2 of a dark mode")
    if mode_i == mode_j:
        numerator = np.sum(p * n_i * (n_i - 1))
    else:
        numerator = np.sum(p * n_i * n_j)
    return float(numerator / (mean_i * mean_j))


def herald_condition(rho: DensityMatrix, setup: DetectorSetup) -> DensityMatrix:
    """Signal state given a click of the herald detector."""
    if rho.n_modes != 2:
        raise ConfigError("herald_condition expects a two-mode state")
    click = 1 - _no_click_weights(rho.dims[1], setup.eta_h)
    unnormalized = np.einsum("ajbj,j->ab", rho.tensor(), click)
    probability = float(np.real(np.trace(unnormalized)))
    if probability <= 0:
        raise HeraldError(f"Herald click probability is {probability:.3e}")
    logger.trace(f"Herald click probability {probability:.6e}")
    return DensityMatrix((rho.dims[0],), unnormalized / probability, rho.leak_tol)


def _marginal(rho: DensityMatrix, mode: int) -> np.ndarray:
    p = rho.photon_distribution()
    others = tuple(axis for axis in range(rho.n_modes) if axis != mode)
    return p.sum(axis=others) if others else p


def state_probabilities(rho: DensityMatrix, mode: int = 0) -> PhotonProbabilities:
    """(p0, p1, p2+) of one mode under ideal photon counting."""
    marginal = _marginal(rho, mode)
    marginal = marginal / marginal.sum()
    return PhotonProbabilities.from_p0_p1(float(marginal[0]), float(marginal[1]))


class PairConfig(StrEnum):
    SIGNAL = "signal"  # signal mode split onto A and B
    HERALD = "herald"  # herald mode split onto A and B
    CROSS = "cross"  # A on the signal mode, H on the herald mode


def pair_clicks(
    rho: DensityMatrix,
    setup: DetectorSetup,
    config: PairConfig,
) -> tuple[float, float]:
    """(P_S, P_C): exactly-one-click and both-click probabilities of a detector pair."""
    if rho.n_modes != 2:
        raise ConfigError("pair_clicks expects a two-mode state")

    if config is PairConfig.CROSS:
        p = rho.photon_distribution()
        eff_first, eff_second = setup.t_split * setup.eta_a, setup.eta_h

        def dark(watch_first: int, watch_second: int) -> float:
            first = _no_click_weights(rho.dims[0], watch_first * eff_first)
            second = _no_click_weights(rho.dims[1], watch_second * eff_second)
            return float(first @ p @ second)

    else:
        mode = 0 if config is PairConfig.SIGNAL else 1
        p = _marginal(rho, mode)
        eff_first = setup.t_split * setup.eta_a
        eff_second = (1 - setup.t_split) * setup.eta_b

        def dark(watch_first: int, watch_second: int) -> float:
            efficiency = watch_first * eff_first + watch_second * eff_second
            return float(_no_click_weights(rho.dims[mode], efficiency) @ p)

    flags = itertools.product((0, 1), repeat=2)
    joint = _joint_from_dark({f: dark(*f) for f in flags}, 2) / dark(0, 0)
    joint = np.clip(joint, 0, None)
    return float(joint[1, 0] + joint[0, 1]), float(joint[1, 1])
