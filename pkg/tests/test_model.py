import math

import numpy as np
import pytest

from qstat.exceptions import ConfigError, ModelOverflowError
from qstat.fock import (
    FockConfig,
    apply,
    beamsplitter,
    displacement,
    partial_trace,
    squeezer,
    tensor,
    thermal_state,
)
from qstat.model import (
    HERALD,
    SIGNAL,
    PRESETS,
    IntensityGrid,
    ModelParams,
    PhaseMode,
    build_state,
    mean_photons,
    scale_params,
)
from qstat.witness import log_negativity

CFG = FockConfig()
LIGHT = FockConfig(n_max=16, n_work=32, leak_tol=1e-4, check_positivity=False)


def test_params_validation() -> None:
    bad = [
        {"s_r_signal": -0.1},
        {"i0": 0.0},
        {"theta_bs1": 7.0},
        {"beta_th_herald": math.nan},
    ]
    for kwargs in bad:
        with pytest.raises(ConfigError):
            ModelParams(**kwargs)


def test_param_names() -> None:
    names = ModelParams.names()
    assert len(names) == 19
    assert names[0] == "i0"
    assert set(names) == set(PRESETS["H(12|11)"].as_dict())


def test_phase_modes() -> None:
    counts = {PhaseMode.FIXED: 16, PhaseMode.BS1_PHASE: 17, PhaseMode.FULL: 19}
    for mode, count in counts.items():
        assert len(ModelParams.names()) - len(mode.frozen) == count


def test_intensity_grid() -> None:
    grid = IntensityGrid.linspace(0.2, 0.6, 5)
    assert len(grid) == 5
    assert grid.values[-1] == pytest.approx(0.6)

    for values in [(), (0.0, 1.0), (0.5, 0.3), (0.5, 0.5)]:
        with pytest.raises(ConfigError):
            IntensityGrid(values)


def test_scale_params_at_unit_intensity() -> None:
    p = PRESETS["H(12|11)"]
    s = scale_params(p, 1.0)
    assert s.r[HERALD] == pytest.approx(0.571)
    assert s.r[SIGNAL] == pytest.approx(0.071)
    assert s.alpha[SIGNAL] == pytest.approx(0.864)
    assert s.n_th[HERALD] == pytest.approx(1.0e-5)


def test_scale_params_power_laws() -> None:
    p = PRESETS["H(12|11)"]
    s = scale_params(p, 0.5)
    assert s.r[HERALD] == pytest.approx(0.571 * 0.5**1.75)
    assert s.alpha[SIGNAL] == pytest.approx(0.864 * 0.5 ** (2.21 / 2))

    low, high = scale_params(p, 0.3), scale_params(p, 0.9)
    for mode in (SIGNAL, HERALD):
        assert low.r[mode] < high.r[mode]
        assert low.alpha[mode] < high.alpha[mode]

    flat = scale_params(ModelParams(s_r_signal=0.3), 0.7)
    assert flat.r[SIGNAL] == pytest.approx(0.3)


def test_scale_params_normalized() -> None:
    p = PRESETS["H(12|11)"]
    normalized = scale_params(p, p.i0, normalize=True)
    plain = scale_params(p, 1.0)
    assert normalized.r == pytest.approx(plain.r)
    assert normalized.alpha == pytest.approx(plain.alpha)


def test_scale_params_overflow() -> None:
    with pytest.raises(ModelOverflowError):
        scale_params(ModelParams(s_r_signal=2.0), 1.0)
    with pytest.raises(ModelOverflowError):
        scale_params(ModelParams(s_alpha_herald=4.0), 1.0)
    with pytest.raises(ConfigError):
        scale_params(ModelParams(), 0.0)


def test_zero_params_give_vacuum() -> None:
    rho = build_state(ModelParams(), 0.5, CFG)
    assert rho.photon_distribution()[0, 0] == pytest.approx(1, abs=1e-12)


def test_thermal_split_by_first_splitter() -> None:
    p = ModelParams(s_th_signal=0.4, theta_bs1=math.pi / 4)
    rho = build_state(p, 1.0, CFG)
    expected = thermal_state(0.2, CFG).photon_distribution()
    for mode in (SIGNAL, HERALD):
        reduced = partial_trace(rho, mode).photon_distribution()
        assert np.allclose(reduced, expected, rtol=0, atol=1e-8)


def test_mean_photons() -> None:
    rho = build_state(ModelParams(s_alpha_signal=0.5), 1.0, CFG)
    assert mean_photons(rho, SIGNAL) == pytest.approx(0.25, abs=1e-8)
    assert mean_photons(rho, HERALD) == pytest.approx(0, abs=1e-12)


def test_product_state_is_not_entangled() -> None:
    p = ModelParams(s_r_signal=0.3, s_r_herald=0.2, s_alpha_signal=0.4, s_th_herald=0.05)
    rho = build_state(p, 1.0, CFG)
    assert log_negativity(rho) == pytest.approx(0, abs=1e-6)


def test_table_states_are_valid() -> None:
    for name, p in PRESETS.items():
        for intensity in (0.2, 0.6, 1.0):
            rho = build_state(p, intensity, CFG)
            assert abs(rho.trace - 1) <= 1e-6, name
            assert rho.min_eigenvalue() >= -1e-9, name


def test_table_state_is_entangled() -> None:
    rho = build_state(PRESETS["H(12|11)"], 1.0, CFG)
    assert log_negativity(rho) > 0


def test_operator_order_matters() -> None:
    p = PRESETS["H(12|11)"]
    intensity = 0.5
    s = scale_params(p, intensity, LIGHT)
    rho = build_state(p, intensity, LIGHT)

    # Second splitter before the squeezers
    swapped = tensor(thermal_state(s.n_th[0], LIGHT), thermal_state(s.n_th[1], LIGHT))
    swapped = apply(beamsplitter(p.theta_bs1, p.phi_bs1, (0, 1), LIGHT), swapped)
    swapped = apply(beamsplitter(p.theta_bs2, p.phi_bs2, (0, 1), LIGHT), swapped)
    swapped = apply(squeezer(s.r[0], p.phi_sq_signal, 0, LIGHT), swapped)
    swapped = apply(squeezer(s.r[1], p.phi_sq_herald, 1, LIGHT), swapped)
    for mode in (SIGNAL, HERALD):
        swapped = apply(displacement(s.alpha[mode], mode, LIGHT), swapped)

    assert abs(mean_photons(rho, SIGNAL) - mean_photons(swapped, SIGNAL)) > 1e-3


@pytest.mark.slow
def test_truncation_convergence() -> None:
    p = PRESETS["H(12|11)"]
    small = build_state(p, 1.0, FockConfig(n_max=20, n_work=36))
    large = build_state(p, 1.0, FockConfig(n_max=30, n_work=45))
    assert mean_photons(small, SIGNAL) == pytest.approx(mean_photons(large, SIGNAL), abs=1e-5)
    assert log_negativity(small) == pytest.approx(log_negativity(large), abs=1e-4)
