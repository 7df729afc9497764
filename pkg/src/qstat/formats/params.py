"""ModelParams as `key=value` lines, one per parameter."""

from __future__ import annotations

from pathlib import Path

from dotenv import dotenv_values

from qstat.exceptions import ConfigError
from qstat.log import logger
from qstat.model import PRESETS, ModelParams

TABLE_PREFIX = "table:"

FILE_KEYS = {
    "i0": "intensity_factor",
    "s_th_signal": "thermal_scale_signal",
    "beta_th_signal": "thermal_exponent_signal",
    "s_th_herald": "thermal_scale_herald",
    "beta_th_herald": "thermal_exponent_herald",
    "s_r_signal": "squeezing_scale_signal",
    "beta_r_signal": "squeezing_exponent_signal",
    "s_r_herald": "squeezing_scale_herald",
    "beta_r_herald": "squeezing_exponent_herald",
    "phi_sq_signal": "squeezing_phase_signal",
    "phi_sq_herald": "squeezing_phase_herald",
    "s_alpha_signal": "displacement_scale_signal",
    "beta_alpha_signal": "displacement_exponent_signal",
    "s_alpha_herald": "displacement_scale_herald",
    "beta_alpha_herald": "displacement_exponent_herald",
    "theta_bs1": "beamsplitter_1_angle",
    "phi_bs1": "beamsplitter_1_phase",
    "theta_bs2": "beamsplitter_2_angle",
    "phi_bs2": "beamsplitter_2_phase",
}
FIELDS = {key: name for name, key in FILE_KEYS.items()}


def read_params(source: str | Path) -> ModelParams:
    """Read a params file, or a preset given as `table:H(12|11)`.

    Missing keys keep their ModelParams defaults.
    """
    source = str(source)
    if source.startswith(TABLE_PREFIX):
        name = source.removeprefix(TABLE_PREFIX)
        if name not in PRESETS:
            raise ConfigError(f"Unknown preset {name}. F.e. {', '.join(PRESETS)}")
        return PRESETS[name]

    if not Path(source).is_file():
        raise ConfigError(f"Params file {source} does not exist")
    raw = dotenv_values(source)
    unknown = set(raw) - set(FIELDS)
    if unknown:
        raise ConfigError(f"Unknown key(s) {sorted(unknown)} in {source}")

    values = {}
    for key, value in raw.items():
        try:
            values[FIELDS[key]] = float(value or "")
        except ValueError as e:
            raise ConfigError(f"{key} in {source} is not a number: {value!r}") from e
    logger.debug(f"Read {len(values)} parameters from {source}")
    return ModelParams(**values)


def write_params(path: str | Path, params: ModelParams) -> None:
    lines = [f"{FILE_KEYS[name]}={value!r}" for name, value in params.as_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
