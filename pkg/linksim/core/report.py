"""CSV / JSON result writers. Every file is written to a temp file and renamed into place."""

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

from shared.models import PointMetrics

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = {
    "strategy": "strategy",
    "actual_sinr_db": "actual_sinr_db",
    "bler": "bler",
    "throughput_mbps": "throughput_mbps",
    "median_cqi": "median_cqi",
    "median_est_sinr_db": "median_estimated_sinr_db",
    "mean_retx_latency_ms": "mean_retx_latency_ms",
    "analytic_latency_ms": "analytic_latency_ms",
    "capped_latency_ms": "capped_latency_ms",
    "drop_rate": "residual_drop_rate",
}

# output column -> PointMetrics.to_dict() key, one table per result plot
RECIPES: dict[str, dict[str, str]] = {
    "sweep.csv": SWEEP_COLUMNS,
    "bler.csv": {
        "strategy": "strategy",
        "target_sinr_db": "target_sinr_db",
        "actual_sinr_db": "actual_sinr_db",
        "bler": "bler",
        "bler_ci_low": "bler_ci_low",
        "bler_ci_high": "bler_ci_high",
        "attempts": "attempts",
    },
    "throughput.csv": {
        "strategy": "strategy",
        "actual_sinr_db": "actual_sinr_db",
        "throughput_mbps": "throughput_mbps",
        "ceiling_mbps": "throughput_ceiling_mbps",
    },
    "sinr_gap.csv": {
        "strategy": "strategy",
        "actual_sinr_db": "actual_sinr_db",
        "median_est_sinr_db": "median_estimated_sinr_db",
        "median_cqi": "median_cqi",
        "median_cqi_sinr_db": "median_cqi_sinr_db",
        "gap_db": "sinr_gap_db",
    },
    "latency.csv": {
        "strategy": "strategy",
        "actual_sinr_db": "actual_sinr_db",
        "bler": "bler",
        "mean_retx_latency_ms": "mean_retx_latency_ms",
        "analytic_latency_ms": "analytic_latency_ms",
        "capped_latency_ms": "capped_latency_ms",
        "mean_n_retx": "mean_n_retx",
        "drop_rate": "residual_drop_rate",
    },
}


def manifest_header(version: str, seed: int, config: dict[str, Any]) -> str:
    """Single comment line that makes a result file reproducible."""
    return f"# linksim {version} master_seed={seed} config={json.dumps(config, sort_keys=True)}"


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Wrote {path}")


def write_csv(path: Path, rows: Iterable[dict[str, Any]], columns: list[str], header: str | None = None) -> None:
    """CSV with an optional leading `#` comment line; None cells are left empty."""
    buffer = io.StringIO()
    if header:
        buffer.write(header + "\n")
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: ("" if row.get(c) is None else row.get(c)) for c in columns})
    _write_atomic(path, buffer.getvalue())


def write_json(path: Path, payload: Any) -> None:
    _write_atomic(path, json.dumps(payload, indent=2, allow_nan=False) + "\n")


def recipe_rows(metrics: list[PointMetrics], columns: dict[str, str]) -> list[dict[str, Any]]:
    rows = []
    for point in metrics:
        full = point.to_dict()
        rows.append({out: full[key] for out, key in columns.items()})
    return rows


def write_sweep(out_dir: Path, metrics: list[PointMetrics], header: str, manifest: dict[str, Any]) -> list[Path]:
    """All recipe CSVs plus sweep.json; returns the written paths."""
    out_dir = Path(out_dir)
    written = []
    for name, columns in RECIPES.items():
        path = out_dir / name
        write_csv(path, recipe_rows(metrics, columns), list(columns), header)
        written.append(path)

    path = out_dir / "sweep.json"
    write_json(path, {"manifest": manifest, "points": [point.to_dict() for point in metrics]})
    written.append(path)
    return written


def read_csv_rows(path: Path) -> list[dict[str, str]]:
    """Rows of a CSV written by `write_csv`, skipping comment lines."""
    with open(path, "r", newline="") as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))
