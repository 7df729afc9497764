"""FitResult files and run manifests."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import UTC, datetime
from pathlib import Path

from qstat import __version__
from qstat.fit import FitResult
from qstat.formats.params import write_params


@dataclass(frozen=True)
class RunManifest:
    command: str
    inputs: list[str]
    config: str | None
    seed: int | None
    out: str
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(UTC).isoformat())


def write_manifest(out: str | Path, manifest: RunManifest) -> Path:
    path = Path(out) / "manifest.json"
    path.write_text(json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8")
    return path


def fit_summary(result: FitResult) -> dict[str, object]:
    return {
        "loss": result.loss,
        "per_observable_loss": {str(k): v for k, v in result.per_observable_loss.items()},
        "stage_trace": [asdict(stage) for stage in result.stage_trace],
        "converged": result.converged,
        "seed": result.seed,
        "n_free": result.n_free,
    }


def write_fit_result(out: str | Path, result: FitResult) -> tuple[Path, Path]:
    """params.txt in the params file format and fit_summary.json."""
    out = Path(out)
    params_path = out / "params.txt"
    summary_path = out / "fit_summary.json"
    write_params(params_path, result.params)
    summary_path.write_text(json.dumps(fit_summary(result), indent=2) + "\n", encoding="utf-8")
    return params_path, summary_path
