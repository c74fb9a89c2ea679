"""Core simulator components."""

from .channel import ChannelConfig, ChannelProfile, FadingChannel, per_re_sinr, realize
from .csi import (
    CqiMapping,
    FeedbackConfig,
    FeedbackLoop,
    cqi_to_sinr,
    data_sinr_effective,
    data_sinr_wideband,
    feedback_schedule,
    pilot_sinr_estimate,
    sinr_to_cqi,
)
from .errors import CalibrationError, ConfigurationError, LatencyDivergenceError
from .grid import GridConfig, ResourceGrid, build_grid, control_res, data_res, pilot_res
from .harq import (
    HarqConfig,
    HarqMode,
    analytic_latency,
    analytic_mean_retx,
    capped_mean_latency,
    run_block,
    run_blocks,
)
from .interference import InterferenceProfile, Strategy, apply_interference, td_npi_mask
from .linkadapt import McsEntry, McsTable, block_error_prob, select_mcs
from .metrics import CqiHistogram, QuantileSketch, StreamingStats, bler_ci
from .scenario import ScenarioConfig, parse_config, serialize
from .sim import calibrate_interference_power, run_point, run_sweep

__all__ = [
    "ChannelConfig", "ChannelProfile", "FadingChannel", "per_re_sinr", "realize",
    "CqiMapping", "FeedbackConfig", "FeedbackLoop", "cqi_to_sinr", "data_sinr_effective",
    "data_sinr_wideband", "feedback_schedule", "pilot_sinr_estimate", "sinr_to_cqi",
    "CalibrationError", "ConfigurationError", "LatencyDivergenceError",
    "GridConfig", "ResourceGrid", "build_grid", "control_res", "data_res", "pilot_res",
    "HarqConfig", "HarqMode", "analytic_latency", "analytic_mean_retx", "capped_mean_latency",
    "run_block", "run_blocks",
    "InterferenceProfile", "Strategy", "apply_interference", "td_npi_mask",
    "McsEntry", "McsTable", "block_error_prob", "select_mcs",
    "CqiHistogram", "QuantileSketch", "StreamingStats", "bler_ci",
    "ScenarioConfig", "parse_config", "serialize",
    "calibrate_interference_power", "run_point", "run_sweep",
]
