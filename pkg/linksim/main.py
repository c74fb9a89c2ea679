#!/usr/bin/env python3
"""
Link-level simulator - command-line entry point.

Commands:
    sweep          run the closed loop over strategies x target SINR points
    latency-table  analytic vs capped retransmission latency for given BLERs
    grid-dump      per-RE (subcarrier, symbol, kind) map of the configured grid
    calibrate      interference power needed per strategy and target SINR

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from dotenv import load_dotenv

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from linksim import __version__
from linksim.core import ConfigurationError, parse_config, run_sweep, serialize
from linksim.core.grid import grid_layout_rows
from linksim.core.harq import analytic_latency, analytic_mean_retx, capped_drop_prob, capped_mean_latency
from linksim.core.interference import equal_density_power, targeted_re_count, tone_count
from linksim.core.report import manifest_header, write_csv, write_sweep
from linksim.core.scenario import ScenarioConfig
from linksim.core.sim import calibrate_interference_power, scenario_grid
from shared.units import mw_to_dbm

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "results"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass
class RunManifest:
    """What one invocation was asked to do."""
    command: str
    output_dir: Path
    config_path: Path | None = None
    overrides: list[str] = field(default_factory=list)
    seed: int | None = None
    trials: int | None = None
    workers: int | None = None
    blers: list[float] = field(default_factory=list)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linksim", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=f"linksim {__version__}")
    parser.add_argument(
        "--log-level", type=str.upper, choices=LOG_LEVELS, default=os.getenv("LINKSIM_LOG_LEVEL", "INFO").upper(),
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON scenario file")
    common.add_argument(
        "--out", type=Path, default=Path(os.getenv("LINKSIM_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)),
        help="output directory",
    )
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--trials", type=int, help="subframes per sweep point")
    common.add_argument("--workers", type=int, default=_env_int("LINKSIM_WORKERS"), help="parallel sweep workers")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="run the strategy x SINR sweep")
    table = sub.add_parser("latency-table", parents=[common], help="analytic vs capped latency")
    table.add_argument("--bler", type=float, nargs="+", default=[0.0, 0.01, 0.1, 0.3, 0.5, 0.9])
    sub.add_parser("grid-dump", parents=[common], help="write the RE map as CSV")
    sub.add_parser("calibrate", parents=[common], help="interference power per strategy and target SINR")
    return parser


def _env_int(name: str) -> int | None:
    value = os.getenv(name)
    return int(value) if value and value.strip().isdigit() else None


def load_scenario(manifest: RunManifest) -> ScenarioConfig:
    """parse_config, then the --seed / --trials / --workers flags."""
    config = parse_config(manifest.config_path, manifest.overrides)
    updates = {}
    if manifest.seed is not None:
        updates["master_seed"] = manifest.seed
    if manifest.trials is not None:
        updates["subframes_per_point"] = manifest.trials
    if manifest.workers is not None:
        updates["workers"] = manifest.workers
    return replace(config, **updates) if updates else config


def latency_table(bler_list: list[float], tau_wait_ms: float, max_retx: int) -> list[dict]:
    """Rows of (bler, analytic_ms, capped_ms, mean_retx, drop_prob)."""
    rows = []
    for bler in bler_list:
        if not 0 <= bler < 1:
            raise ConfigurationError(
                f"latency-table: BLER {bler} outside [0, 1); mean retransmission latency diverges as BLER -> 1"
            )
        rows.append({
            "bler": bler,
            "analytic_ms": analytic_latency(bler, tau_wait_ms),
            "capped_ms": capped_mean_latency(bler, tau_wait_ms, max_retx),
            "mean_retx": analytic_mean_retx(bler),
            "drop_prob": capped_drop_prob(bler, max_retx),
        })
    return rows


def cmd_sweep(config: ScenarioConfig, manifest: RunManifest) -> None:
    metrics = run_sweep(config)
    header = manifest_header(__version__, config.master_seed, serialize(config))
    written = write_sweep(
        manifest.output_dir,
        metrics,
        header,
        {"version": __version__, "master_seed": config.master_seed, "config": serialize(config)},
    )

    print(f"\n{'strategy':<9} {'SINR dB':>8} {'BLER':>7} {'Mbps':>8} {'CQI':>5} {'est dB':>8} {'retx ms':>9}")
    for m in metrics:
        print(
            f"{m.strategy:<9} {m.actual_sinr_db:8.2f} {m.bler:7.3f} {m.throughput_mbps:8.2f} "
            f"{m.median_cqi:5.1f} {m.median_estimated_sinr_db:8.2f} {m.mean_retx_latency_ms:9.3f}"
        )
    print(f"\nResults written to {manifest.output_dir} ({len(written)} files)")


def cmd_latency_table(config: ScenarioConfig, manifest: RunManifest) -> None:
    harq = config.harq
    rows = latency_table(manifest.blers, harq.tau_wait_ms, harq.max_retx)
    header = manifest_header(__version__, config.master_seed, serialize(config))
    write_csv(manifest.output_dir / "latency_table.csv", rows, list(rows[0]) if rows else ["bler"], header)

    print(f"\ntau_wait = {harq.tau_wait_ms} ms, cap = {harq.max_retx} retransmissions")
    print(f"{'BLER':>6} {'analytic ms':>12} {'capped ms':>10} {'mean retx':>10} {'P(drop)':>9}")
    for row in rows:
        print(
            f"{row['bler']:6.3f} {row['analytic_ms']:12.4f} {row['capped_ms']:10.4f} "
            f"{row['mean_retx']:10.4f} {row['drop_prob']:9.5f}"
        )


def cmd_grid_dump(config: ScenarioConfig, manifest: RunManifest) -> None:
    grid = scenario_grid(config)
    path = manifest.output_dir / "grid.csv"
    header = manifest_header(__version__, config.master_seed, serialize(config))
    write_csv(path, grid_layout_rows(grid), ["subcarrier", "symbol", "kind"], header)
    print(
        f"Grid {grid.shape[0]}x{grid.shape[1]}: {int(grid.pilot_mask.sum())} pilot, "
        f"{grid.data_re_count} data, {int(grid.control_mask.sum())} control REs -> {path}"
    )


def cmd_calibrate(config: ScenarioConfig, manifest: RunManifest) -> None:
    grid = scenario_grid(config)
    rows = []
    for strategy in config.strategies:
        profile = replace(config.interference, strategy=strategy)
        scenario = replace(config, interference=profile)
        res = targeted_re_count(grid, profile)
        for target in config.sweep_sinr_db:
            power = calibrate_interference_power(target, scenario)
            rows.append({
                "strategy": strategy.value,
                "target_sinr_db": target,
                "total_power_dbm": mw_to_dbm(power),
                "per_re_power_dbm": mw_to_dbm(power / res) if res else None,
                "targeted_res": res,
                "tones": tone_count(grid, profile),
                # total power at 0 dBm on every targeted RE
                "equal_density_power_dbm": mw_to_dbm(equal_density_power(grid, profile, 1.0)) if res else None,
            })

    header = manifest_header(__version__, config.master_seed, serialize(config))
    path = manifest.output_dir / "calibration.csv"
    write_csv(path, [_finite(r) for r in rows], list(rows[0]), header)

    print(f"\n{'strategy':<9} {'target dB':>9} {'total dBm':>10} {'per-RE dBm':>11} {'REs':>6} {'tones':>6}")
    for r in rows:
        per_re = "-" if r["per_re_power_dbm"] is None else f"{r['per_re_power_dbm']:.2f}"
        print(
            f"{r['strategy']:<9} {r['target_sinr_db']:9.2f} {r['total_power_dbm']:10.2f} "
            f"{per_re:>11} {r['targeted_res']:6d} {r['tones']:6d}"
        )
    print(f"\nCalibration written to {path}")


def _finite(row: dict) -> dict:
    return {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in row.items()}


HANDLERS = {
    "sweep": cmd_sweep,
    "latency-table": cmd_latency_table,
    "grid-dump": cmd_grid_dump,
    "calibrate": cmd_calibrate,
}


def main(argv: list[str] | None = None) -> int:
    """Run one command; returns the process exit code."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    logging.basicConfig(level=args.log_level)

    manifest = RunManifest(
        command=args.command,
        output_dir=args.out,
        config_path=args.config,
        overrides=args.overrides,
        seed=args.seed,
        trials=args.trials,
        workers=args.workers,
        blers=getattr(args, "bler", []),
    )

    try:
        config = load_scenario(manifest)
        HANDLERS[manifest.command](config, manifest)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except Exception as e:
        logger.error(f"{manifest.command} failed: {e}", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
