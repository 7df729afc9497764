import math
from pathlib import Path

import numpy as np
import pytest

from qstat.config import environment
from qstat.detect import ClickRecord
from qstat.exceptions import ConfigError, SchemaError
from qstat.fit import FIT_FOCK, ObservableCurve, ObservableKind
from qstat.fit.config import DEFAULT_GRID
from qstat.fock import FockConfig
from qstat.formats import (
    RunConfig,
    load_run_config,
    read_curve,
    read_curves,
    read_params,
    read_records,
    write_curve,
    write_params,
    write_records,
)
from qstat.model import PRESETS, IntensityGrid, ModelParams, PhaseMode

G2 = ObservableKind.HERALDED_G2

ROWS = [
    (0.2, ClickRecord(1000, 30, 28, 1, 2000, 1900, 4, n_pulses=10**6)),
    (0.35, ClickRecord(2500, 90, 85, 3, 5000, 4800, 25, n_pulses=10**6)),
]
HEADER = "intensity,R0,R1A,R1B,R2,RSA,RSB,RC,NP\n"


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def test_records_round_trip(tmp_path: Path) -> None:
    first = tmp_path / "first.csv"
    write_records(first, ROWS)
    assert first.read_text().splitlines()[0] == HEADER.strip()
    assert first.read_text().splitlines()[1] == "0.2,1000,30,28,1,2000,1900,4,1000000"

    rows = read_records(first)
    assert rows == ROWS

    second = tmp_path / "second.csv"
    write_records(second, rows)
    assert first.read_bytes() == second.read_bytes()


def test_records_schema_errors(tmp_path: Path) -> None:
    bad_header = _write(tmp_path / "header.csv", "I,R0\n0.1,1\n")
    with pytest.raises(SchemaError) as e:
        read_records(bad_header)
    assert e.value.line == 1

    row = "0.2,1000,30,28,1,2000,1900,4,1000000\n"
    cases = {
        "negative.csv": "0.3,1000,-3,28,1,2000,1900,4,1000000\n",
        "fraction.csv": "0.3,1000,3.5,28,1,2000,1900,4,1000000\n",
        "intensity.csv": "high,1000,30,28,1,2000,1900,4,1000000\n",
        "infinite.csv": "inf,1000,30,28,1,2000,1900,4,1000000\n",
        # more threefold than twofold events
        "threefold.csv": "0.3,1000,30,28,50,2000,1900,4,1000000\n",
    }
    for name, second in cases.items():
        path = _write(tmp_path / name, HEADER + row + second)
        with pytest.raises(SchemaError) as e:
            read_records(path)
        assert e.value.line == 3, name


def test_empty_records(tmp_path: Path) -> None:
    assert read_records(_write(tmp_path / "empty.csv", "")) == []
    assert read_records(_write(tmp_path / "header.csv", HEADER)) == []
    with pytest.raises(SchemaError):
        read_records(tmp_path / "missing.csv")


def test_params_round_trip(tmp_path: Path) -> None:
    for params in (*PRESETS.values(), ModelParams()):
        path = tmp_path / "params.txt"
        write_params(path, params)
        assert read_params(path) == params


def test_params_file_format(tmp_path: Path) -> None:
    path = tmp_path / "params.txt"
    write_params(path, ModelParams(s_r_signal=0.25))
    lines = path.read_text().splitlines()
    assert len(lines) == len(ModelParams.names())
    assert "squeezing_scale_signal=0.25" in lines

    partial = _write(tmp_path / "partial.txt", "# measured\nsqueezing_scale_signal=0.3\n")
    assert read_params(partial) == ModelParams(s_r_signal=0.3)


def test_params_presets() -> None:
    assert read_params("table:H(12|11)") == PRESETS["H(12|11)"]
    with pytest.raises(ConfigError):
        read_params("table:H(1|1)")


def test_params_errors(tmp_path: Path) -> None:
    cases = {
        "unknown.txt": "squeezing_scale=0.3\n",
        "text.txt": "squeezing_scale_signal=strong\n",
        "empty_value.txt": "squeezing_scale_signal=\n",
    }
    for name, text in cases.items():
        with pytest.raises(ConfigError):
            read_params(_write(tmp_path / name, text))
    with pytest.raises(ConfigError):
        read_params(tmp_path / "missing.txt")


def test_curve_round_trip(tmp_path: Path) -> None:
    curve = ObservableCurve(
        G2,
        x=[0.1, 0.2, 0.3],
        y=[0.5, np.nan, 0.7],
        sigma=[0.01, np.nan, 0.02],
        intensity=[0.2, 0.4, 0.6],
    )
    path = write_curve(tmp_path, curve)
    assert path.name == "heralded_g2.csv"
    assert path.read_text().splitlines()[2] == "0.4,0.2,nan,nan"

    read = read_curve(path)
    assert read.kind == G2
    assert np.array_equal(read.x, curve.x)
    assert np.array_equal(read.y, curve.y, equal_nan=True)
    assert np.array_equal(read.sigma, curve.sigma, equal_nan=True)
    assert np.array_equal(read.intensity, curve.intensity)


def test_curve_without_sigma(tmp_path: Path) -> None:
    path = _write(tmp_path / "qng_depth.csv", "x,mean_photons,value\n0.2,0.1,3.5\n0.4,0.2,inf\n")
    curve = read_curve(path)
    assert curve.kind == ObservableKind.QNG_DEPTH
    assert curve.sigma is None
    assert curve.y[1] == math.inf


def test_curve_errors(tmp_path: Path) -> None:
    with pytest.raises(SchemaError):
        read_curve(_write(tmp_path / "nope.csv", "x,mean_photons,value\n0.1,0.2,0.3\n"))
    with pytest.raises(SchemaError) as e:
        read_curve(_write(tmp_path / "heralded_g2.csv", "x,value\n0.1,0.3\n"))
    assert e.value.line == 1

    text = "x,mean_photons,value\n0.1,0.2,0.3\n0.2,abc,0.4\n"
    with pytest.raises(SchemaError) as e:
        read_curve(_write(tmp_path / "nc_witness_signal.csv", text))
    assert e.value.line == 3


def test_read_curves_ignores_other_files(tmp_path: Path) -> None:
    for kind in (G2, ObservableKind.NC_WITNESS_HERALD):
        write_curve(tmp_path, ObservableCurve(kind, [0.1, 0.2], [1.0, 2.0]))
    _write(tmp_path / "records.csv", HEADER)
    curves = read_curves(tmp_path)
    assert set(curves) == {G2, ObservableKind.NC_WITNESS_HERALD}


def test_default_run_config() -> None:
    run = load_run_config(None)
    assert run == RunConfig()
    assert run.grid == DEFAULT_GRID
    assert run.phase_mode == PhaseMode.FIXED
    assert run.fit_config(seed=3).fock == FIT_FOCK


def test_run_config_sections(tmp_path: Path) -> None:
    text = """
[grid]
values = [0.1, 0.3]

[detector]
eta_h = 0.5
t_split = 0.4

[model]
phase_mode = "full"

[bounds]
s_r_signal = [0.1, 0.3]

[weights]
heralded_g2 = 2.0

[random_search]
draws = 10

[differential_evolution]
generations = 5

[annealing]
steps = 7
"""
    run = load_run_config(_write(tmp_path / "run.toml", text))
    assert run.grid == IntensityGrid((0.1, 0.3))
    assert run.detector.eta_h == 0.5
    assert run.fock is None

    cfg = run.fit_config(seed=7)
    assert cfg.seed == 7
    assert cfg.phase_mode == PhaseMode.FULL
    assert cfg.bounds["s_r_signal"] == (0.1, 0.3)
    assert cfg.weights[G2] == 2.0
    assert cfg.random_draws == 10
    assert cfg.generations == 5
    assert cfg.annealing_steps == 7
    assert cfg.setup.t_split == 0.4
    assert cfg.fock == FIT_FOCK


def test_grid_linspace_section(tmp_path: Path) -> None:
    run = load_run_config(_write(tmp_path / "run.toml", "[grid]\ni_min = 0.1\npoints = 3\n"))
    assert run.grid == IntensityGrid.linspace(0.1, 0.7, 3)


def test_fock_section(tmp_path: Path) -> None:
    path = _write(tmp_path / "run.toml", "[fock]\nn_max = 10\nn_work = 20\n")
    run = load_run_config(path)
    assert run.fock == FockConfig(n_max=10, n_work=20)
    assert run.fit_config(seed=0).fock == FockConfig(n_max=10, n_work=20)


def test_run_config_errors(tmp_path: Path) -> None:
    cases = [
        "[plot]\nsize = 3\n",
        "[grid]\nstep = 0.1\n",
        "grid = 3\n",
        "[bounds]\ns_r_signal = [0.1]\n",
        "[bounds]\nsqueezing = [0.1, 0.2]\n",
        "[weights]\ng2 = 1.0\n",
        '[model]\nphase_mode = "loose"\n',
        "[fock]\nn_max = 1\n",
        "[detector]\neta_a = 1.5\n",
        "[grid]\nvalues = [0.3, 0.1]\n",
        "[grid\n",
    ]
    for i, text in enumerate(cases):
        with pytest.raises(ConfigError):
            load_run_config(_write(tmp_path / f"run{i}.toml", text))
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.toml")


def test_check_bounds() -> None:
    run = RunConfig(bounds={"s_r_signal": (0.1, 0.3)})
    run.check_bounds(ModelParams(s_r_signal=0.2))
    with pytest.raises(ConfigError):
        run.check_bounds(ModelParams(s_r_signal=0.5))


def test_environment(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("QSTAT_THREADS", raising=False)
    monkeypatch.delenv("QSTAT_LOG_LEVEL", raising=False)
    dotenv = _write(tmp_path / ".env", "QSTAT_THREADS=2\nQSTAT_LOG_LEVEL=debug\n")

    env = environment(str(dotenv))
    assert env.threads == 2
    assert env.log_level == "DEBUG"

    assert environment(str(tmp_path / "none.env")).threads == 1

    monkeypatch.setenv("QSTAT_THREADS", "4")
    environment.cache_clear()
    assert environment(str(dotenv)).threads == 4

    monkeypatch.setenv("QSTAT_THREADS", "zero")
    environment.cache_clear()
    with pytest.raises(ConfigError):
        environment(str(dotenv))
    environment.cache_clear()
