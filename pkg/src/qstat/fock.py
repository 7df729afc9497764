"""Truncated Fock-space linear algebra for one or two optical modes.

States are dense density matrices over |n_0> (x) |n_1>, flattened mode-0-major:
the flat index of |n_0, n_1> is n_0 * (n_max + 1) + n_1.

Single-mode unitaries are exponentiated on an enlarged working space and
projected back; the beamsplitter is exponentiated block by block in the
conserved total photon number, which is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh, expm
from scipy.special import comb, gammaln

from qstat.exceptions import ConfigError, LeakageError, ModelOverflowError, NumericalError
from qstat.log import logger

HERMITIAN_TOL = 1e-10
PSD_TOL = -1e-9
MAX_SQUEEZING = 1.5
MIXTURE_CUTOFF = 1e-20


@dataclass(frozen=True)
class FockConfig:
    n_max: int = 25
    n_work: int = 40
    leak_tol: float = 1e-6
    # Eigen-decomposition of every built state. Off inside optimizer loops.
    check_positivity: bool = True

    def __post_init__(self) -> None:
        if self.n_max < 2:
            raise ConfigError(f"n_max must be at least 2, got {self.n_max}")
        if self.n_work < self.n_max:
            raise ConfigError(f"n_work ({self.n_work}) must be >= n_max ({self.n_max})")
        if not self.leak_tol > 0:
            raise ConfigError(f"leak_tol must be positive, got {self.leak_tol}")

    @property
    def max_displacement_sq(self) -> float:
        return self.n_work / 4


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: tuple[int, ...]
    elements: np.ndarray
    leak_tol: float = 1e-6

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        size = math.prod(d + 1 for d in dims)
        elements = np.array(self.elements, dtype=complex)
        if elements.shape != (size, size):
            raise ValueError(f"Expected a {size}x{size} matrix for dims {dims}")
        elements.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "elements", elements)

        hermiticity = np.max(np.abs(elements - elements.conj().T))
        if hermiticity > HERMITIAN_TOL:
            raise NumericalError(f"Density matrix is not Hermitian ({hermiticity:.3e})")
        if abs(self.trace - 1) > self.leak_tol:
            raise LeakageError(f"Trace {self.trace:.12f} is not within {self.leak_tol} of 1")

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.elements)))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d + 1 for d in self.dims)

    def tensor(self) -> np.ndarray:
        """The matrix as a (ket axes..., bra axes...) tensor."""
        return self.elements.reshape(self.shape + self.shape)

    def photon_distribution(self) -> np.ndarray:
        """Joint photon-number distribution, one axis per mode."""
        return np.real(np.diag(self.elements)).reshape(self.shape)

    def min_eigenvalue(self) -> float:
        return float(eigvalsh(self.elements)[0])

    def check_positive(self) -> None:
        lowest = self.min_eigenvalue()
        if lowest < PSD_TOL:
            raise NumericalError(f"Density matrix is not positive (eigenvalue {lowest:.3e})")


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """An operator acting on `modes` only; `elements` is its local matrix."""

    dims: tuple[int, ...]
    elements: np.ndarray
    modes: tuple[int, ...]

    def __post_init__(self) -> None:
        size = math.prod(d + 1 for d in self.dims)
        if len(self.dims) != len(self.modes):
            raise ValueError("One cutoff per acted-upon mode is required")
        if self.elements.shape != (size, size):
            raise ValueError(f"Expected a {size}x{size} matrix for dims {self.dims}")
        self.elements.flags.writeable = False

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d + 1 for d in self.dims)

    def dagger(self) -> ModeOperator:
        return ModeOperator(self.dims, self.elements.conj().T.copy(), self.modes)

    def column_leakage(self) -> np.ndarray:
        """Probability lost by each projected input basis state."""
        return 1 - np.sum(np.abs(self.elements) ** 2, axis=0)

    def embed(self, dims: tuple[int, ...]) -> np.ndarray:
        """The operator as a matrix on the full space with cutoffs `dims`."""
        shape = tuple(d + 1 for d in dims)
        size = math.prod(shape)
        identity = np.eye(size, dtype=complex).reshape(shape + shape)
        local = self.elements.reshape(self.shape + self.shape)
        return _contract(local, identity, list(self.modes)).reshape(size, size)


def _contract(local: np.ndarray, tensor: np.ndarray, axes: list[int]) -> np.ndarray:
    """Contract a local (out..., in...) tensor into `axes` of a state tensor."""
    k = len(axes)
    out = np.tensordot(local, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _sandwich(local: np.ndarray, tensor: np.ndarray, modes: list[int]) -> np.ndarray:
    n_modes = tensor.ndim // 2
    tensor = _contract(local, tensor, modes)
    return _contract(local.conj(), tensor, [n_modes + m for m in modes])


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff + 1, dtype=float)).astype(complex)


def expect(op: np.ndarray, rho: DensityMatrix) -> complex:
    return complex(np.trace(op @ rho.elements))


def _projected(full: np.ndarray, mode: int, cfg: FockConfig, name: str) -> ModeOperator:
    block = full[: cfg.n_max + 1, : cfg.n_max + 1].copy()
    op = ModeOperator((cfg.n_max,), block, (mode,))
    leakage = op.column_leakage()
    logger.trace(f"{name}: vacuum leakage {leakage[0]:.3e}")
    if leakage[0] > cfg.leak_tol:
        raise LeakageError(
            f"{name} moves {leakage[0]:.3e} of the vacuum beyond n_max={cfg.n_max}"
        )
    return op


def displacement(alpha: complex, mode: int, cfg: FockConfig) -> ModeOperator:
    if abs(alpha) ** 2 > cfg.max_displacement_sq:
        raise ModelOverflowError(
            f"|alpha|^2 = {abs(alpha) ** 2:.3f} exceeds n_work/4 = {cfg.max_displacement_sq}"
        )
    a = annihilation(cfg.n_work)
    generator = alpha * a.conj().T - np.conj(alpha) * a
    return _projected(expm(generator), mode, cfg, "displacement")


def squeezer(r: float, phi_sq: float, mode: int, cfg: FockConfig) -> ModeOperator:
    if r < 0:
        raise ConfigError(f"Squeezing magnitude must be non-negative, got {r}")
    if r > MAX_SQUEEZING:
        raise ModelOverflowError(f"Squeezing r = {r:.3f} exceeds {MAX_SQUEEZING}")
    xi = r * np.exp(1j * phi_sq)
    a = annihilation(cfg.n_work)
    a_dag = a.conj().T
    generator = 0.5 * (np.conj(xi) * a @ a - xi * a_dag @ a_dag)
    return _projected(expm(generator), mode, cfg, "squeezer")


@lru_cache(maxsize=64)
def beamsplitter(theta: float, phi: float, modes: tuple[int, int], cfg: FockConfig) -> ModeOperator:
    """exp[theta (e^{-i phi} a_1 a_2^dag - e^{i phi} a_1^dag a_2)] on `modes` = (1, 2).

    The generator keeps n_1 + n_2 fixed, so every block |k, N - k> is
    exponentiated untruncated and only then cut to n_max per mode.
    """
    if len(set(modes)) != 2:
        raise ConfigError(f"A beamsplitter needs two distinct modes, got {modes}")
    d = cfg.n_max + 1
    full = np.zeros((d * d, d * d), dtype=complex)
    for total in range(2 * cfg.n_max + 1):
        k = np.arange(total + 1)
        generator = np.zeros((total + 1, total + 1), dtype=complex)
        # a_1 a_2^dag |k, N-k> = sqrt(k (N-k+1)) |k-1, N-k+1>
        lower = np.sqrt(k[1:] * (total - k[1:] + 1))
        generator[k[:-1], k[1:]] = theta * np.exp(-1j * phi) * lower
        # a_1^dag a_2 |k, N-k> = sqrt((k+1) (N-k)) |k+1, N-k-1>
        raise_ = np.sqrt((k[:-1] + 1) * (total - k[:-1]))
        generator[k[1:], k[:-1]] = -theta * np.exp(1j * phi) * raise_
        block = expm(generator)

        kept = k[(k <= cfg.n_max) & (total - k <= cfg.n_max)]
        flat = kept * d + (total - kept)
        full[np.ix_(flat, flat)] = block[np.ix_(kept, kept)]

    return ModeOperator((cfg.n_max, cfg.n_max), full, tuple(modes))


def apply(op: ModeOperator, rho: DensityMatrix) -> DensityMatrix:
    """U rho U^dag."""
    for mode, cutoff in zip(op.modes, op.dims, strict=True):
        if mode >= rho.n_modes or rho.dims[mode] != cutoff:
            raise ConfigError(f"Operator on modes {op.modes} does not fit a state with {rho.dims}")

    local = op.elements.reshape(op.shape + op.shape)
    out = _sandwich(local, rho.tensor(), list(op.modes)).reshape(rho.elements.shape)
    out = 0.5 * (out + out.conj().T)

    trace = float(np.real(np.trace(out)))
    if trace < 1 - rho.leak_tol:
        raise LeakageError(f"Trace dropped to {trace:.9f} after an operator on {op.modes}")
    return DensityMatrix(rho.dims, out, rho.leak_tol)


def evolve_mixture(
    weights: np.ndarray, ops: list[ModeOperator], leak_tol: float = 1e-6
) -> DensityMatrix:
    """U diag(weights) U^dag with U = ops[-1] ... ops[0].

    `weights` is a photon-number distribution with one axis per mode. Only
    its basis kets are propagated, so the cost grows with the number of
    populated states rather than with the square of the matrix size.
    """
    weights = np.asarray(weights, dtype=float)
    shape = weights.shape
    dims = tuple(s - 1 for s in shape)
    for op in ops:
        if any(m >= len(dims) or dims[m] != d for m, d in zip(op.modes, op.dims, strict=True)):
            raise ConfigError(f"Operator on modes {op.modes} does not fit a state with {dims}")

    flat = weights.ravel()
    # Components this far below the largest weight are dropped.
    kept = np.flatnonzero(flat > MIXTURE_CUTOFF * flat.max())
    kets = np.zeros((flat.size, kept.size), dtype=complex)
    kets[kept, np.arange(kept.size)] = 1
    kets = kets.reshape(shape + (kept.size,))
    for op in ops:
        kets = _contract(op.elements.reshape(op.shape + op.shape), kets, list(op.modes))
    kets = kets.reshape(flat.size, kept.size)

    out = (kets * flat[kept]) @ kets.conj().T
    out = 0.5 * (out + out.conj().T)
    trace = float(np.real(np.trace(out)))
    if trace < 1 - leak_tol:
        raise LeakageError(f"Trace dropped to {trace:.9f} in a circuit of {len(ops)} operators")
    return DensityMatrix(dims, out, leak_tol)


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    if rho.n_modes != 2:
        raise ConfigError("partial_trace expects a two-mode state")
    subscripts = "ajbj->ab" if keep == 0 else "jajb->ab"
    reduced = np.einsum(subscripts, rho.tensor())
    return DensityMatrix((rho.dims[keep],), reduced, rho.leak_tol)


def partial_transpose(rho: DensityMatrix, mode: int) -> np.ndarray:
    if rho.n_modes != 2:
        raise ConfigError("partial_transpose expects a two-mode state")
    transposed = np.swapaxes(rho.tensor(), mode, rho.n_modes + mode)
    return transposed.reshape(rho.elements.shape)


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.abs(eigvalsh(m))))


def pure_loss(rho: DensityMatrix, mode: int, transmission: float) -> DensityMatrix:
    """Pass one mode through a beamsplitter of intensity transmission `transmission`.

    Kraus operators A_k = sum_n sqrt(C(n, k) t^(n-k) (1-t)^k) |n-k><n|.
    """
    if not 0 <= transmission <= 1:
        raise ConfigError(f"Transmission must be in [0, 1], got {transmission}")
    cutoff = rho.dims[mode]
    n = np.arange(cutoff + 1)
    tensor = rho.tensor()
    out = np.zeros_like(tensor)
    for k in range(cutoff + 1):
        amplitudes = np.sqrt(comb(n[k:], k) * transmission ** (n[k:] - k) * (1 - transmission) ** k)
        kraus = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        kraus[n[k:] - k, n[k:]] = amplitudes
        out += _sandwich(kraus, tensor, [mode])
    return DensityMatrix(rho.dims, out.reshape(rho.elements.shape), rho.leak_tol)


def tensor(*states: DensityMatrix) -> DensityMatrix:
    elements = states[0].elements
    for state in states[1:]:
        elements = np.kron(elements, state.elements)
    dims = tuple(d for state in states for d in state.dims)
    return DensityMatrix(dims, elements, min(s.leak_tol for s in states))


def _from_distribution(p: np.ndarray, cfg: FockConfig) -> DensityMatrix:
    return DensityMatrix((cfg.n_max,), np.diag(p), cfg.leak_tol)


def _from_ket(ket: np.ndarray, dims: tuple[int, ...], cfg: FockConfig) -> DensityMatrix:
    return DensityMatrix(dims, np.outer(ket, ket.conj()), cfg.leak_tol)


def vacuum(cfg: FockConfig, n_modes: int = 1) -> DensityMatrix:
    return tensor(*[fock_state(0, cfg)] * n_modes)


def fock_state(n: int, cfg: FockConfig) -> DensityMatrix:
    if not 0 <= n <= cfg.n_max:
        raise ConfigError(f"|{n}> is outside the cutoff {cfg.n_max}")
    p = np.zeros(cfg.n_max + 1)
    p[n] = 1
    return _from_distribution(p, cfg)


def thermal_state(n_th: float, cfg: FockConfig) -> DensityMatrix:
    """Geometric photon distribution renormalized over the truncated basis."""
    if n_th < 0:
        raise ConfigError(f"Thermal occupation must be non-negative, got {n_th}")
    q = n_th / (1 + n_th)
    tail = q ** (cfg.n_max + 1)
    if tail > cfg.leak_tol:
        raise LeakageError(f"Cutoff {cfg.n_max} too small for n_th={n_th}: tail mass {tail:.3e}")
    p = (1 - q) * q ** np.arange(cfg.n_max + 1)
    return _from_distribution(p / p.sum(), cfg)


def coherent_state(alpha: complex, cfg: FockConfig) -> DensityMatrix:
    if alpha == 0:
        return fock_state(0, cfg)
    n = np.arange(cfg.n_max + 1)
    log_amplitude = -(abs(alpha) ** 2) / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    ket = np.exp(log_amplitude) * np.exp(1j * n * np.angle(alpha))
    return _from_ket(ket, (cfg.n_max,), cfg)


def two_mode_squeezed_vacuum(r: float, cfg: FockConfig) -> DensityMatrix:
    """sum_n tanh(r)^n / cosh(r) |n, n>."""
    d = cfg.n_max + 1
    n = np.arange(d)
    ket = np.zeros(d * d, dtype=complex)
    ket[n * d + n] = np.tanh(r) ** n / np.cosh(r)
    return _from_ket(ket, (cfg.n_max, cfg.n_max), cfg)
