import math

import numpy as np
import pytest

from qstat.exceptions import ConfigError, LeakageError, ModelOverflowError
from qstat.fock import (
    DensityMatrix,
    FockConfig,
    annihilation,
    apply,
    beamsplitter,
    coherent_state,
    displacement,
    evolve_mixture,
    expect,
    fock_state,
    number_operator,
    partial_trace,
    partial_transpose,
    pure_loss,
    squeezer,
    tensor,
    thermal_state,
    trace_norm,
    two_mode_squeezed_vacuum,
    vacuum,
)

CFG = FockConfig()
SMALL = FockConfig(n_max=8, n_work=16)


def _close(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    return bool(np.allclose(a, b, rtol=0, atol=atol))


def _reliable_block(op: np.ndarray, leak_tol: float) -> np.ndarray:
    leakage = 1 - np.sum(np.abs(op) ** 2, axis=0)
    return op[:, leakage <= leak_tol]


def test_config_validation() -> None:
    with pytest.raises(ConfigError):
        FockConfig(n_max=10, n_work=5)
    with pytest.raises(ConfigError):
        FockConfig(leak_tol=0)


def test_density_matrix_rejects_bad_trace() -> None:
    with pytest.raises(LeakageError):
        DensityMatrix((2,), np.diag([0.5, 0.2, 0.1]))


def test_vacuum_and_thermal() -> None:
    rho = vacuum(CFG, n_modes=2)
    assert rho.photon_distribution()[0, 0] == 1
    assert thermal_state(0.0, CFG).photon_distribution()[0] == 1

    p = thermal_state(0.1, CFG).photon_distribution()
    assert p[0] == pytest.approx(1 / 1.1, abs=1e-12)


def test_thermal_cutoff_too_small() -> None:
    with pytest.raises(LeakageError):
        thermal_state(5.0, FockConfig(n_max=5, n_work=10))


def test_displacement_identity_and_inverse() -> None:
    op = displacement(0, 0, CFG)
    assert _close(op.elements, np.eye(CFG.n_max + 1), 1e-12)

    rho = apply(displacement(-0.8, 0, CFG), apply(displacement(0.8, 0, CFG), vacuum(CFG)))
    assert rho.photon_distribution()[0] == pytest.approx(1, abs=1e-8)


def test_displaced_vacuum_mean() -> None:
    rho = apply(displacement(0.8, 0, CFG), vacuum(CFG))
    n = expect(number_operator(CFG.n_max), rho).real
    assert n == pytest.approx(0.64, abs=1e-6)

    coherent = coherent_state(0.8, CFG)
    assert _close(rho.elements, coherent.elements, 1e-8)


def test_displacement_overflow() -> None:
    with pytest.raises(ModelOverflowError):
        displacement(4.0, 0, CFG)


def test_squeezer_identity() -> None:
    assert _close(squeezer(0.0, 1.3, 0, CFG).elements, np.eye(CFG.n_max + 1), 1e-12)


def test_squeezed_vacuum() -> None:
    r = 0.567
    rho = apply(squeezer(r, math.pi, 0, CFG), vacuum(CFG))
    n = expect(number_operator(CFG.n_max), rho).real
    assert n == pytest.approx(math.sinh(r) ** 2, abs=1e-5)

    a = annihilation(CFG.n_max)
    x = (a + a.conj().T) / 2
    p = (a - a.conj().T) / 2j
    variances = sorted(expect(q @ q, rho).real for q in (x, p))
    assert variances[0] == pytest.approx(math.exp(-2 * r) / 4, abs=1e-6)
    assert variances[1] == pytest.approx(math.exp(2 * r) / 4, abs=1e-6)


def test_squeezer_limits() -> None:
    with pytest.raises(ConfigError):
        squeezer(-0.1, 0, 0, CFG)
    with pytest.raises(ModelOverflowError):
        squeezer(1.6, 0, 0, CFG)


def test_projected_operators_are_unitary_on_reliable_columns() -> None:
    ops = [
        displacement(0.8, 0, CFG).elements,
        squeezer(0.5, math.pi, 0, CFG).elements,
        beamsplitter(0.7, 0.3, (0, 1), SMALL).elements,
    ]
    for op in ops:
        block = _reliable_block(op, 1e-6)
        assert block.shape[1] > 0
        gram = block.conj().T @ block
        assert _close(gram, np.eye(block.shape[1]), 1e-5)


def test_beamsplitter_identity() -> None:
    op = beamsplitter(0.0, 0.4, (0, 1), SMALL)
    assert _close(op.elements, np.eye((SMALL.n_max + 1) ** 2), 1e-12)


def test_beamsplitter_half() -> None:
    rho = tensor(fock_state(1, SMALL), vacuum(SMALL))
    out = apply(beamsplitter(math.pi / 4, 0.0, (0, 1), SMALL), rho)
    p = out.photon_distribution()
    assert p[1, 0] == pytest.approx(0.5, abs=1e-12)
    assert p[0, 1] == pytest.approx(0.5, abs=1e-12)
    assert p[1, 1] == pytest.approx(0, abs=1e-12)


def test_beamsplitter_swap() -> None:
    rho = tensor(fock_state(1, SMALL), vacuum(SMALL))
    out = apply(beamsplitter(math.pi / 2, 0.0, (0, 1), SMALL), rho)
    p = out.photon_distribution()
    assert p[0, 1] == pytest.approx(1, abs=1e-12)


def test_beamsplitter_conserves_photon_number() -> None:
    rho = tensor(coherent_state(0.6, CFG), thermal_state(0.3, CFG))
    out = apply(beamsplitter(0.9, -1.2, (0, 1), CFG), rho)

    def total(state: DensityMatrix) -> float:
        p = state.photon_distribution()
        n0, n1 = np.meshgrid(np.arange(p.shape[0]), np.arange(p.shape[1]), indexing="ij")
        return float(np.sum(p * (n0 + n1)))

    assert total(out) == pytest.approx(total(rho), abs=1e-10)


def test_thermal_through_balanced_splitter() -> None:
    rho = tensor(thermal_state(0.4, CFG), vacuum(CFG))
    out = apply(beamsplitter(math.pi / 4, 0.0, (0, 1), CFG), rho)
    expected = thermal_state(0.2, CFG).photon_distribution()
    for mode in (0, 1):
        reduced = partial_trace(out, mode).photon_distribution()
        assert _close(reduced, expected, 1e-8)


def test_evolve_mixture_matches_sequential_apply() -> None:
    signal, herald = thermal_state(0.3, CFG), thermal_state(0.1, CFG)
    ops = [
        beamsplitter(0.4, 0.2, (0, 1), CFG),
        squeezer(0.25, math.pi, 0, CFG),
        squeezer(0.15, math.pi, 1, CFG),
        beamsplitter(1.1, -0.7, (0, 1), CFG),
        displacement(0.5, 0, CFG),
    ]
    rho = tensor(signal, herald)
    for op in ops:
        rho = apply(op, rho)

    weights = np.outer(signal.photon_distribution(), herald.photon_distribution())
    out = evolve_mixture(weights, ops, CFG.leak_tol)
    assert out.dims == rho.dims
    assert _close(out.elements, rho.elements, 1e-10)

    assert _close(evolve_mixture(weights, []).elements, tensor(signal, herald).elements, 1e-14)


def test_evolve_mixture_rejects_mismatched_operator() -> None:
    weights = np.outer(vacuum(SMALL).photon_distribution(), vacuum(SMALL).photon_distribution())
    with pytest.raises(ConfigError):
        evolve_mixture(weights, [displacement(0.1, 0, CFG)])
    with pytest.raises(ConfigError):
        evolve_mixture(weights, [displacement(0.1, 2, SMALL)])


def test_beamsplitter_needs_two_modes() -> None:
    with pytest.raises(ConfigError):
        beamsplitter(0.3, 0.0, (0, 0), SMALL)


def test_partial_trace() -> None:
    rho_a = thermal_state(0.2, SMALL)
    rho_b = coherent_state(0.3, FockConfig(n_max=8, n_work=16, leak_tol=1e-4))
    product = tensor(rho_a, rho_b)
    assert _close(partial_trace(product, 0).elements, rho_a.elements, 1e-10)
    assert _close(partial_trace(product, 1).elements, rho_b.elements, 1e-12)

    reduced = partial_trace(two_mode_squeezed_vacuum(0.3, CFG), 0)
    expected = thermal_state(math.sinh(0.3) ** 2, CFG)
    assert _close(reduced.elements, expected.elements, 1e-10)


def test_partial_transpose() -> None:
    product = tensor(thermal_state(0.2, SMALL), thermal_state(0.1, SMALL))
    assert np.linalg.eigvalsh(partial_transpose(product, 1)).min() >= -1e-10

    pt = partial_transpose(two_mode_squeezed_vacuum(0.5, CFG), 1)
    assert np.linalg.eigvalsh(pt).min() < -0.1


def test_trace_norm() -> None:
    assert trace_norm(np.diag([0.5, -0.5])) == pytest.approx(1.0)
    assert trace_norm(thermal_state(0.3, CFG).elements) == pytest.approx(1.0, abs=1e-12)

    pt = partial_transpose(two_mode_squeezed_vacuum(0.5, CFG), 1)
    assert trace_norm(pt) == pytest.approx(math.e, abs=1e-3)


def test_pure_loss() -> None:
    rho = pure_loss(fock_state(1, SMALL), 0, 0.3)
    p = rho.photon_distribution()
    assert p[0] == pytest.approx(0.7, abs=1e-12)
    assert p[1] == pytest.approx(0.3, abs=1e-12)

    coherent = pure_loss(coherent_state(0.8, CFG), 0, 0.25)
    assert _close(coherent.elements, coherent_state(0.4, CFG).elements, 1e-10)

    with pytest.raises(ConfigError):
        pure_loss(rho, 0, 1.5)
