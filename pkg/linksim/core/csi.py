"""
Pilot-aided SINR estimation and periodic CQI feedback.

The receiver estimates SINR on pilot REs only, reduces it with the
exponential effective SINR mapping, quantizes it to a 4-bit CQI and reports
it every `period_subframes`; the transmitter sees each report `delay_subframes`
later. Interference that avoids the pilots never reaches the estimate.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from shared.models import CqiReport
from shared.units import linear_to_db

from .channel import ChannelRealization, per_re_sinr
from .errors import ConfigurationError
from .grid import ResourceGrid, mask_from_res

logger = logging.getLogger(__name__)

MAX_CQI = 15


def eesm(sinr_linear: np.ndarray, beta: float = 1.0) -> float:
    """Exponential effective SINR: -beta * ln(mean(exp(-sinr / beta)))."""
    values = np.asarray(sinr_linear, dtype=float).ravel()
    if values.size == 0:
        raise ConfigurationError("effective SINR needs at least one RE")
    if beta <= 0:
        raise ConfigurationError(f"csi.eesm_beta must be positive, got {beta}")
    return float(-beta * (logsumexp(-values / beta) - math.log(values.size)))


def _subset_mask(grid: ResourceGrid, subset) -> np.ndarray:
    if subset is None:
        return grid.data_mask
    if isinstance(subset, np.ndarray) and subset.dtype == bool:
        return subset
    return mask_from_res(grid, subset)


def pilot_sinr_estimate(grid: ResourceGrid, realization: ChannelRealization, beta: float = 1.0) -> float:
    """Effective SINR (dB) over pilot REs only."""
    if not grid.pilot_mask.any():
        raise ConfigurationError("grid has no pilot REs to estimate SINR from")
    sinr = per_re_sinr(grid, realization)
    return float(linear_to_db(eesm(sinr[grid.pilot_mask], beta)))


def data_sinr_effective(
    grid: ResourceGrid,
    realization: ChannelRealization,
    data_re_subset=None,
    beta: float = 1.0,
) -> float:
    """Effective SINR (dB) over the allocated data REs; drives block errors, never fed back."""
    mask = _subset_mask(grid, data_re_subset)
    if not mask.any():
        raise ConfigurationError("data RE subset is empty")
    sinr = per_re_sinr(grid, realization)
    return float(linear_to_db(eesm(sinr[mask], beta)))


def wideband_power_sums(grid: ResourceGrid, realization: ChannelRealization, mask: np.ndarray) -> tuple[float, float]:
    """(signal power, interference-plus-noise power) summed over `mask`."""
    signal = float(np.sum(grid.signal_power[mask] * realization.gain[mask]))
    impairment = float(np.sum(grid.interference_power[mask]) + grid.noise_power * mask.sum())
    return signal, impairment


def data_sinr_wideband(grid: ResourceGrid, realization: ChannelRealization, data_re_subset=None) -> float:
    """Measured actual SINR (dB): total signal over total interference plus noise."""
    mask = _subset_mask(grid, data_re_subset)
    if not mask.any():
        raise ConfigurationError("data RE subset is empty")
    signal, impairment = wideband_power_sums(grid, realization, mask)
    return float(linear_to_db(signal / impairment))


@dataclass(frozen=True)
class CqiMapping:
    """Affine SINR <-> CQI mapping: sinr_db = slope * cqi + intercept."""
    slope_db: float = 2.11
    intercept_db: float = -9.0

    def __post_init__(self):
        if self.slope_db <= 0:
            raise ConfigurationError(f"csi.cqi_slope_db must be positive, got {self.slope_db}")

    def cqi_to_sinr(self, cqi: int) -> float:
        return self.slope_db * cqi + self.intercept_db

    def sinr_to_cqi(self, sinr_db: float) -> int:
        """Largest CQI whose mapped SINR does not exceed `sinr_db`, clamped to [0, 15]."""
        level = math.floor((sinr_db - self.intercept_db) / self.slope_db + 1e-9)
        return int(min(MAX_CQI, max(0, level)))


DEFAULT_MAPPING = CqiMapping()


def sinr_to_cqi(sinr_db: float, mapping: CqiMapping = DEFAULT_MAPPING) -> int:
    return mapping.sinr_to_cqi(sinr_db)


def cqi_to_sinr(cqi: int, mapping: CqiMapping = DEFAULT_MAPPING) -> float:
    return mapping.cqi_to_sinr(cqi)


class FeedbackMode(str, Enum):
    WIDEBAND = "wideband"


@dataclass(frozen=True)
class FeedbackConfig:
    """Periodic wideband CSI reporting."""
    period_subframes: int = 10
    delay_subframes: int = 4
    mode: FeedbackMode = FeedbackMode.WIDEBAND
    initial_cqi: int = 15
    eesm_beta: float = 1.0
    mapping: CqiMapping = DEFAULT_MAPPING

    def __post_init__(self):
        object.__setattr__(self, "mode", FeedbackMode(self.mode))
        if self.period_subframes < 1:
            raise ConfigurationError(f"csi.csi_period_sf must be >= 1, got {self.period_subframes}")
        if self.delay_subframes < 0:
            raise ConfigurationError(f"csi.csi_delay_sf must be >= 0, got {self.delay_subframes}")
        if not 0 <= self.initial_cqi <= MAX_CQI:
            raise ConfigurationError(f"csi.initial_cqi must be in [0, {MAX_CQI}], got {self.initial_cqi}")
        if self.eesm_beta <= 0:
            raise ConfigurationError(f"csi.eesm_beta must be positive, got {self.eesm_beta}")


def feedback_schedule(config: FeedbackConfig, subframe: int) -> int | None:
    """Generation subframe of the report in force at `subframe`, or None before the first."""
    usable = subframe - config.delay_subframes
    if usable < 0:
        return None
    return usable - usable % config.period_subframes


def is_report_subframe(config: FeedbackConfig, subframe: int) -> bool:
    return subframe % config.period_subframes == 0


class FeedbackLoop:
    """Report history owned by one simulation run."""

    def __init__(self, config: FeedbackConfig):
        self.config = config
        self.reports: dict[int, CqiReport] = {}

    def observe(self, subframe: int, estimated_sinr_db: float, cqi: int | None = None) -> CqiReport | None:
        """
        Generate a report if `subframe` is a reporting instant.

        `cqi` overrides the quantized estimate, for receivers that select the
        CQI per MCS row rather than from one aggregated SINR.
        """
        if not is_report_subframe(self.config, subframe):
            return None
        report = CqiReport(
            cqi=self.config.mapping.sinr_to_cqi(estimated_sinr_db) if cqi is None else cqi,
            generated_subframe=subframe,
            estimated_sinr_db=estimated_sinr_db,
        )
        self.reports[subframe] = report
        # keep only what the schedule can still reach
        horizon = subframe - self.config.delay_subframes - self.config.period_subframes
        for stale in [t for t in self.reports if t < horizon]:
            del self.reports[stale]
        logger.debug(f"CQI report at {subframe}: {report.cqi} ({estimated_sinr_db:.2f} dB)")
        return report

    def cqi_at(self, subframe: int) -> int:
        """CQI the transmitter uses at `subframe`."""
        generated = feedback_schedule(self.config, subframe)
        if generated is None or generated not in self.reports:
            return self.config.initial_cqi
        return self.reports[generated].cqi
