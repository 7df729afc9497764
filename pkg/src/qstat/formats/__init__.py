from qstat.formats.curves import read_curve, read_curves, write_curve
from qstat.formats.params import read_params, write_params
from qstat.formats.records import read_records, write_records
from qstat.formats.results import RunManifest, write_fit_result, write_manifest
from qstat.formats.settings import RunConfig, load_run_config

__all__ = [
    "RunConfig",
    "RunManifest",
    "load_run_config",
    "read_curve",
    "read_curves",
    "read_params",
    "read_records",
    "write_curve",
    "write_fit_result",
    "write_manifest",
    "write_params",
    "write_records",
]
