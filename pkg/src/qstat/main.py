import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
import pandas as pd

from qstat import __version__
from qstat.detect import simulate_record
from qstat.exceptions import ConfigError, NumericalError, SchemaError
from qstat.fit import fit, forward
from qstat.fock import FockConfig
from qstat.formats import (
    RunManifest,
    load_run_config,
    read_curves,
    read_params,
    read_records,
    write_curve,
    write_fit_result,
    write_manifest,
    write_records,
)
from qstat.formats.records import FLOAT_FORMAT
from qstat.log import logger
from qstat.model import build_state
from qstat.report import COLUMNS, witness_row

EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_CONVERGENCE = 3

config_option = click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="TOML run configuration.",
)
out_option = click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("qstat-out"),
    show_default=True,
    help="Output directory.",
)
seed_option = click.option("--seed", type=int, default=0, show_default=True)
params_option = click.option(
    "--params",
    "params_source",
    required=True,
    help="ModelParams file, or a preset such as table:H(12|11).",
)


def _prepare(out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    return out


@click.group()
@click.version_option(__version__)
def cli() -> None:
    """Photon statistics of heralded two-mode states."""


@cli.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@config_option
@out_option
def witness(csv_path: str, config: str | None, out: Path) -> int:
    """Witness report for every record of a click-count CSV."""
    load_run_config(config)
    rows = read_records(csv_path)
    report = pd.DataFrame([witness_row(intensity, rec) for intensity, rec in rows], columns=COLUMNS)

    path = _prepare(out) / "witness_report.csv"
    report.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    write_manifest(out, RunManifest("witness", [csv_path], config, None, str(out)))

    flagged = int((report["flag"] != "").sum())
    click.echo(f"{len(report)} record(s), {flagged} flagged -> {path}")
    return 0


@cli.command("forward")
@params_option
@config_option
@out_option
@click.option("--extended", is_flag=True, help="Also write delta_w, log_negativity and cross_g2.")
def forward_cmd(params_source: str, config: str | None, out: Path, *, extended: bool) -> int:
    """Observable curves of a parameter set on the configured grid."""
    run = load_run_config(config)
    params = read_params(params_source)
    run.check_bounds(params)
    curves = forward(
        params,
        run.grid,
        run.detector,
        run.fock or FockConfig(),
        normalize=run.model.normalize_intensity,
        extended=extended,
    )

    _prepare(out)
    for curve in curves.values():
        path = write_curve(out, curve)
        click.echo(f"{curve.kind}: {path}")
    write_manifest(out, RunManifest("forward", [params_source], config, None, str(out)))
    logger.success(f"Wrote {len(curves)} curves to {out}")
    return 0


@cli.command("fit")
@click.argument("data_dir", type=click.Path(exists=True, file_okay=False))
@config_option
@seed_option
@out_option
def fit_cmd(data_dir: str, config: str | None, seed: int, out: Path) -> int:
    """Fit the model to the observable CSVs of a directory."""
    run = load_run_config(config)
    curves = read_curves(data_dir)
    if len(curves) < 2:
        raise ConfigError(f"{data_dir} holds {len(curves)} observable CSV(s), a fit needs two")

    result = fit(curves, run.fit_config(seed))
    params_path, summary_path = write_fit_result(_prepare(out), result)
    write_manifest(out, RunManifest("fit", [data_dir], config, seed, str(out)))

    click.echo(f"loss {result.loss:.6g} -> {params_path}, {summary_path}")
    return 0 if result.converged else EXIT_CONVERGENCE


@cli.command()
@params_option
@config_option
@seed_option
@click.option("--pulses", type=click.IntRange(min=1), default=None, help="Override N_P.")
@out_option
def simulate(
    params_source: str, config: str | None, seed: int, pulses: int | None, out: Path
) -> int:
    """Sampled click records of a parameter set on the configured grid."""
    run = load_run_config(config)
    params = read_params(params_source)
    run.check_bounds(params)
    setup = replace(run.detector, n_pulses=pulses) if pulses else run.detector
    cfg = run.fock or FockConfig()

    # One independent stream per grid point.
    streams = np.random.SeedSequence(seed).spawn(len(run.grid))
    rows = []
    for intensity, stream in zip(run.grid.values, streams, strict=True):
        rho = build_state(params, intensity, cfg, normalize=run.model.normalize_intensity)
        rows.append((intensity, simulate_record(rho, setup, np.random.default_rng(stream))))

    path = _prepare(out) / "records.csv"
    write_records(path, rows)
    write_manifest(out, RunManifest("simulate", [params_source], config, seed, str(out)))
    click.echo(f"{len(rows)} record(s) of {setup.n_pulses} pulses -> {path}")
    return 0


def run(args: list[str] | None = None) -> int:
    """Run the CLI and map failures onto exit codes."""
    try:
        code = cli.main(args=args, prog_name="qstat", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except (ConfigError, SchemaError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except NumericalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_NUMERICAL
    return code if isinstance(code, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
