"""
Scenario configuration: JSON defaults, user file, dotted overrides.

Config files are JSON with the sections grid, channel, interference, csi,
linkadapt, harq and sweep. A user file is deep-merged over the shipped
defaults, then `section.key=value` overrides are applied.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from shared.units import dbm_to_mw

from .channel import ChannelConfig, ChannelProfile
from .csi import CqiMapping, FeedbackConfig
from .errors import ConfigurationError
from .grid import GridConfig
from .harq import HarqConfig
from .interference import InterferenceProfile, Strategy
from .linkadapt import OuterLoopConfig

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).parent.parent / "config" / "scenario_defaults.json"

# accepted alongside total_power_dbm; serialize() writes it so the power survives a round-trip exactly
EXTRA_KEYS = {"interference": {"total_power_mw"}}


@dataclass(frozen=True)
class LinkAdaptConfig:
    """MCS table source, payload share of delivered bits, and the optional outer loop."""
    mcs_table_csv: str | None = None
    overhead_factor: float = 0.85
    outer_loop: OuterLoopConfig = field(default_factory=OuterLoopConfig)

    def __post_init__(self):
        if not 0 < self.overhead_factor <= 1:
            raise ConfigurationError(f"linkadapt.overhead_factor must be in (0, 1], got {self.overhead_factor}")


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    # cabled setup; the EPA fading profile is opt-in
    channel: ChannelConfig = field(default_factory=lambda: ChannelConfig(profile=ChannelProfile.AWGN))
    interference: InterferenceProfile = field(default_factory=InterferenceProfile)
    csi: FeedbackConfig = field(default_factory=FeedbackConfig)
    harq: HarqConfig = field(default_factory=HarqConfig)
    linkadapt: LinkAdaptConfig = field(default_factory=LinkAdaptConfig)
    sweep_sinr_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0)
    strategies: tuple[Strategy, ...] = (
        Strategy.PILOT_TONES,
        Strategy.FREQ_DOMAIN_NPI,
        Strategy.TIME_DOMAIN_NPI,
        Strategy.BARRAGE,
    )
    subframes_per_point: int = 100_000
    master_seed: int = 1
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sweep_sinr_db", tuple(float(s) for s in self.sweep_sinr_db))
        object.__setattr__(self, "strategies", tuple(Strategy.parse(s) for s in self.strategies))

        if not self.sweep_sinr_db:
            raise ConfigurationError("sweep.sweep_sinr_db must not be empty")
        if not all(math.isfinite(s) for s in self.sweep_sinr_db):
            raise ConfigurationError("sweep.sweep_sinr_db entries must be finite")
        if not self.strategies:
            raise ConfigurationError("sweep.strategies must not be empty")
        if self.subframes_per_point < 1:
            raise ConfigurationError(f"sweep.subframes_per_point must be >= 1, got {self.subframes_per_point}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigurationError(f"sweep.master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.workers < 1:
            raise ConfigurationError(f"sweep.workers must be >= 1, got {self.workers}")


def load_defaults() -> dict:
    with open(DEFAULTS_PATH, "r") as f:
        return json.load(f)


def deep_merge(base: dict, update: dict, path: str = "") -> dict:
    """Recursive merge; every key in `update` must already exist in `base`."""
    merged = dict(base)
    for key, value in update.items():
        dotted = f"{path}.{key}" if path else key
        section = path.split(".")[0] if path else key
        if key not in base and key not in EXTRA_KEYS.get(section, ()):
            raise ConfigurationError(f"unknown config key '{dotted}'")
        if isinstance(merged.get(key), dict):
            if not isinstance(value, dict):
                raise ConfigurationError(f"config key '{dotted}' must be a section")
            merged[key] = deep_merge(merged[key], value, dotted)
        else:
            merged[key] = value
    return merged


def parse_override(override: str) -> dict:
    """'section.key=value' -> {'section': {'key': value}}; values parsed as JSON, else raw string."""
    name, sep, raw = override.partition("=")
    section, dot, key = name.strip().partition(".")
    if not sep or not dot or not section or not key or "." in key:
        raise ConfigurationError(f"malformed override '{override}', expected section.key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return {section: {key: value}}


def _build(raw: dict) -> ScenarioConfig:
    grid, channel, interference = raw["grid"], raw["channel"], raw["interference"]
    csi, linkadapt, harq, sweep = raw["csi"], raw["linkadapt"], raw["harq"], raw["sweep"]

    if interference.get("total_power_mw") is not None:
        if interference.get("total_power_dbm") is not None:
            raise ConfigurationError("set only one of interference.total_power_dbm and interference.total_power_mw")
        total_power = float(interference["total_power_mw"])
    elif interference.get("total_power_dbm") is not None:
        total_power = dbm_to_mw(interference["total_power_dbm"])
    else:
        total_power = 0.0

    return ScenarioConfig(
        grid=GridConfig(**grid),
        channel=ChannelConfig(
            snr_db=channel["snr_db"],
            doppler_hz=channel["doppler_hz"],
            profile=channel["channel_profile"],
            tap_delays_ns=channel["tap_delays_ns"],
            tap_powers_db=channel["tap_powers_db"],
            subframe_duration_s=channel["subframe_duration_s"],
            subcarrier_spacing_hz=channel["subcarrier_spacing_hz"],
            seed=channel["seed"],
        ),
        interference=InterferenceProfile(
            strategy=interference["strategy"],
            total_power=total_power,
            tone_spacing=interference["tone_spacing"],
            tone_offset=interference["tone_offset"],
            duty_cycle=interference["duty_cycle"],
        ),
        csi=FeedbackConfig(
            period_subframes=csi["csi_period_sf"],
            delay_subframes=csi["csi_delay_sf"],
            mode=csi["mode"],
            initial_cqi=csi["initial_cqi"],
            eesm_beta=csi["eesm_beta"],
            mapping=CqiMapping(slope_db=csi["cqi_slope_db"], intercept_db=csi["cqi_intercept_db"]),
        ),
        harq=HarqConfig(tau_wait_ms=harq["tau_wait_ms"], max_retx=harq["max_retx"], mode=harq["harq_mode"]),
        linkadapt=LinkAdaptConfig(
            mcs_table_csv=linkadapt["mcs_table_csv"],
            overhead_factor=linkadapt["overhead_factor"],
            outer_loop=OuterLoopConfig(
                enabled=linkadapt["olla_enabled"],
                target_bler=linkadapt["olla_target_bler"],
                step_up_db=linkadapt["olla_step_up_db"],
                offset_min_db=linkadapt["olla_offset_min_db"],
                offset_max_db=linkadapt["olla_offset_max_db"],
            ),
        ),
        sweep_sinr_db=sweep["sweep_sinr_db"],
        strategies=sweep["strategies"],
        subframes_per_point=sweep["subframes_per_point"],
        master_seed=sweep["master_seed"],
        workers=sweep["workers"],
    )


def parse_config(
    path: Path | str | None = None,
    overrides: Iterable[str] | dict | None = None,
) -> ScenarioConfig:
    """
    Load a validated ScenarioConfig.

    Args:
        path: JSON config file; None uses the shipped defaults only.
        overrides: 'section.key=value' strings, or a nested dict, applied after the file.

    Raises:
        ConfigurationError: unreadable file, unknown key, or invalid value.
    """
    raw = load_defaults()

    if path is not None:
        try:
            with open(path, "r") as f:
                text = f.read()
            user = json.loads(text) if text.strip() else {}
        except OSError as e:
            raise ConfigurationError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config {path} is not valid JSON: {e}") from e
        if not isinstance(user, dict):
            raise ConfigurationError(f"config {path} must hold a JSON object")
        raw = deep_merge(raw, user)

    if isinstance(overrides, dict):
        raw = deep_merge(raw, overrides)
    else:
        for override in overrides or ():
            raw = deep_merge(raw, parse_override(override))

    try:
        config = _build(raw)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"invalid config value: {e}") from e

    logger.debug(f"Parsed scenario config from {path or 'defaults'}")
    return config


def serialize(config: ScenarioConfig) -> dict[str, Any]:
    """JSON-able dict that parse_config reads back to an equal ScenarioConfig."""
    grid, channel, interference = config.grid, config.channel, config.interference
    csi, harq = config.csi, config.harq
    olla = config.linkadapt.outer_loop
    return {
        "grid": {
            "num_rb": grid.num_rb,
            "subcarriers_per_rb": grid.subcarriers_per_rb,
            "symbols_per_subframe": grid.symbols_per_subframe,
            "pilot_symbol_indices": list(grid.pilot_symbol_indices),
            "pilot_subcarrier_period": grid.pilot_subcarrier_period,
            "pilot_subcarrier_shifts": list(grid.pilot_subcarrier_shifts),
            "control_symbol_count": grid.control_symbol_count,
        },
        "channel": {
            "snr_db": channel.snr_db,
            "doppler_hz": channel.doppler_hz,
            "channel_profile": channel.profile.value,
            "tap_delays_ns": list(channel.tap_delays_ns),
            "tap_powers_db": list(channel.tap_powers_db),
            "subframe_duration_s": channel.subframe_duration_s,
            "subcarrier_spacing_hz": channel.subcarrier_spacing_hz,
            "seed": channel.seed,
        },
        "interference": {
            "strategy": interference.strategy.value,
            "total_power_dbm": None,
            "total_power_mw": interference.total_power,
            "tone_spacing": interference.tone_spacing,
            "tone_offset": interference.tone_offset,
            "duty_cycle": interference.duty_cycle,
        },
        "csi": {
            "csi_period_sf": csi.period_subframes,
            "csi_delay_sf": csi.delay_subframes,
            "mode": csi.mode.value,
            "initial_cqi": csi.initial_cqi,
            "eesm_beta": csi.eesm_beta,
            "cqi_slope_db": csi.mapping.slope_db,
            "cqi_intercept_db": csi.mapping.intercept_db,
        },
        "linkadapt": {
            "mcs_table_csv": config.linkadapt.mcs_table_csv,
            "overhead_factor": config.linkadapt.overhead_factor,
            "olla_enabled": olla.enabled,
            "olla_target_bler": olla.target_bler,
            "olla_step_up_db": olla.step_up_db,
            "olla_offset_min_db": olla.offset_min_db,
            "olla_offset_max_db": olla.offset_max_db,
        },
        "harq": {
            "tau_wait_ms": harq.tau_wait_ms,
            "max_retx": harq.max_retx,
            "harq_mode": harq.mode.value,
        },
        "sweep": {
            "sweep_sinr_db": list(config.sweep_sinr_db),
            "strategies": [s.value for s in config.strategies],
            "subframes_per_point": config.subframes_per_point,
            "master_seed": config.master_seed,
            "workers": config.workers,
        },
    }
