"""
Multi-tone interference strategies realized as per-RE power maps.

Every strategy spreads its total power equally over the REs it targets:

- pilot tones (PI): continuous tones on the pilot-bearing subcarriers;
  subcarriers that never carry a pilot are untouched.
- frequency-domain NPI: equally spaced tones between pilot subcarriers,
  data REs only.
- time-domain NPI: pulsed interference on non-pilot symbols, data REs only.
- barrage: every RE.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .grid import ResourceGrid

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    PILOT_TONES = "pi"
    FREQ_DOMAIN_NPI = "npi_fd"
    TIME_DOMAIN_NPI = "npi_td"
    BARRAGE = "barrage"
    NONE = "none"

    @classmethod
    def parse(cls, value: "str | Strategy") -> "Strategy":
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise ConfigurationError(f"interference.strategy must be one of {choices}, got {value!r}") from None

    @property
    def code(self) -> int:
        """Stable small integer, used to key random streams."""
        return list(Strategy).index(self)


@dataclass(frozen=True)
class InterferenceProfile:
    """Interferer strategy and power budget (linear mW)."""
    strategy: Strategy = Strategy.NONE
    total_power: float = 0.0
    tone_spacing: int = 3
    tone_offset: int = 1
    duty_cycle: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        if not (math.isfinite(self.total_power) and self.total_power >= 0):
            raise ConfigurationError(f"interference.total_power must be finite and >= 0, got {self.total_power}")
        if self.tone_spacing <= 0:
            raise ConfigurationError(f"interference.tone_spacing must be positive, got {self.tone_spacing}")
        if not 0 <= self.tone_offset < self.tone_spacing:
            raise ConfigurationError(
                f"interference.tone_offset must be in [0, {self.tone_spacing}), got {self.tone_offset}"
            )
        if not 0 < self.duty_cycle <= 1:
            raise ConfigurationError(f"interference.duty_cycle must be in (0, 1], got {self.duty_cycle}")

    def with_power(self, total_power: float) -> "InterferenceProfile":
        return replace(self, total_power=float(total_power))


def td_npi_mask(grid: ResourceGrid, duty_cycle: float, pilot_symbol_indices=None) -> frozenset[int]:
    """
    Symbols hit by pulsed interference between pilots.

    floor(duty_cycle * n) of the n non-pilot symbols are chosen, evenly spaced.
    """
    if pilot_symbol_indices is None:
        pilot_symbol_indices = grid.config.pilot_symbol_indices
    pilots = set(pilot_symbol_indices)
    candidates = [s for s in range(grid.config.symbols_per_subframe) if s not in pilots]
    count = min(len(candidates), math.floor(duty_cycle * len(candidates) + 1e-9))
    if count <= 0:
        return frozenset()
    picks = np.floor(np.arange(count) * len(candidates) / count).astype(int)
    return frozenset(candidates[i] for i in picks)


def fd_npi_tones(grid: ResourceGrid, tone_spacing: int, tone_offset: int) -> np.ndarray:
    """Equally spaced tone subcarriers, skipping any that carry a pilot."""
    tones = np.arange(tone_offset, grid.shape[0], tone_spacing)
    return np.setdiff1d(tones, grid.pilot_subcarriers)


def targeted_mask(grid: ResourceGrid, profile: InterferenceProfile) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    strategy = profile.strategy

    if strategy is Strategy.PILOT_TONES:
        mask[grid.pilot_subcarriers, :] = True
    elif strategy is Strategy.FREQ_DOMAIN_NPI:
        mask[fd_npi_tones(grid, profile.tone_spacing, profile.tone_offset), :] = True
        mask &= grid.data_mask
    elif strategy is Strategy.TIME_DOMAIN_NPI:
        symbols = sorted(td_npi_mask(grid, profile.duty_cycle))
        mask[:, symbols] = True
        mask &= grid.data_mask
    elif strategy is Strategy.BARRAGE:
        mask[:] = True
    return mask


def targeted_re_count(grid: ResourceGrid, profile: InterferenceProfile) -> int:
    return int(targeted_mask(grid, profile).sum())


def tone_count(grid: ResourceGrid, profile: InterferenceProfile) -> int:
    """Distinct subcarriers the interferer occupies."""
    return int(targeted_mask(grid, profile).any(axis=1).sum())


def equal_density_power(grid: ResourceGrid, profile: InterferenceProfile, per_re_power: float) -> float:
    """Total power a strategy needs to put `per_re_power` on each targeted RE."""
    return per_re_power * targeted_re_count(grid, profile)


def apply_interference(grid: ResourceGrid, profile: InterferenceProfile) -> ResourceGrid:
    """Return a new grid with the profile's power split equally over its targeted REs."""
    mask = targeted_mask(grid, profile)
    count = int(mask.sum())

    if count == 0:
        if profile.total_power > 0:
            raise ConfigurationError(
                f"strategy {profile.strategy.value} targets no REs on this grid but total_power > 0"
            )
        return grid.with_interference(np.zeros(grid.shape))

    per_re = profile.total_power / count
    logger.debug(f"{profile.strategy.value}: {count} REs x {per_re:.6g} mW")
    return grid.with_interference(np.where(mask, per_re, 0.0))
