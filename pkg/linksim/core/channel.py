"""
Per-subframe channel gains for a quasi-static, time-correlated fading channel.

Each tap evolves as a first-order autoregressive complex Gaussian process
with coefficient J0(2*pi*fd*T). The frequency response of the tapped delay
line gives a per-subcarrier power gain that is constant over the subframe.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import j0

from shared.units import db_to_linear

from .errors import ConfigurationError
from .grid import GridConfig, ResourceGrid

logger = logging.getLogger(__name__)

# 3GPP extended pedestrian A
EPA_TAP_DELAYS_NS = (0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0)
EPA_TAP_POWERS_DB = (0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8)


class ChannelProfile(str, Enum):
    AWGN = "awgn"
    FLAT_BLOCK = "flat"
    TAPPED_DELAY_LINE = "epa"

    @classmethod
    def parse(cls, value: "str | ChannelProfile") -> "ChannelProfile":
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(p.value for p in cls)
            raise ConfigurationError(f"channel.channel_profile must be one of {choices}, got {value!r}") from None


@dataclass(frozen=True)
class ChannelConfig:
    """Fading channel parameters. SNR excludes interference; mean gain is 1."""
    snr_db: float = 30.0
    doppler_hz: float = 20.0
    profile: ChannelProfile = ChannelProfile.TAPPED_DELAY_LINE
    tap_delays_ns: tuple[float, ...] = EPA_TAP_DELAYS_NS
    tap_powers_db: tuple[float, ...] = EPA_TAP_POWERS_DB
    subframe_duration_s: float = 1e-3
    subcarrier_spacing_hz: float = 15e3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "profile", ChannelProfile.parse(self.profile))
        object.__setattr__(self, "tap_delays_ns", tuple(float(d) for d in self.tap_delays_ns))
        object.__setattr__(self, "tap_powers_db", tuple(float(p) for p in self.tap_powers_db))

        if not math.isfinite(self.snr_db):
            raise ConfigurationError(f"channel.snr_db must be finite, got {self.snr_db}")
        if not self.tap_delays_ns or len(self.tap_delays_ns) != len(self.tap_powers_db):
            raise ConfigurationError("channel.tap_delays_ns and channel.tap_powers_db must be non-empty and equal length")
        if any(d < 0 for d in self.tap_delays_ns):
            raise ConfigurationError("channel.tap_delays_ns must be non-negative")
        if self.doppler_hz < 0:
            raise ConfigurationError(f"channel.doppler_hz must be >= 0, got {self.doppler_hz}")
        if self.subframe_duration_s <= 0 or self.subcarrier_spacing_hz <= 0:
            raise ConfigurationError("channel.subframe_duration_s and subcarrier_spacing_hz must be positive")
        if self.seed < 0:
            raise ConfigurationError(f"channel.seed must be non-negative, got {self.seed}")

    @property
    def noise_power(self) -> float:
        """Per-RE noise power (mW) for a unit-power signal."""
        return float(db_to_linear(-self.snr_db))

    @property
    def tap_powers(self) -> np.ndarray:
        """Linear tap powers normalized to sum 1."""
        powers = db_to_linear(self.tap_powers_db)
        return powers / powers.sum()

    @property
    def ar_coefficient(self) -> float:
        """Lag-one (one subframe) correlation of each complex tap."""
        return float(j0(2.0 * np.pi * self.doppler_hz * self.subframe_duration_s))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Per-RE power gain for one subframe."""
    gain: np.ndarray
    subframe_index: int
    taps: np.ndarray


class FadingChannel:
    """
    Stateful fading stream for one simulation run.

    Subframes must be requested in non-decreasing order; jumps of k subframes
    advance the AR(1) state exactly (coefficient raised to the k-th power).
    """

    def __init__(
        self,
        config: ChannelConfig,
        grid_config: GridConfig | None = None,
        rng: np.random.Generator | None = None,
    ):
        self.config = config
        grid_config = grid_config or GridConfig()
        self.shape = (grid_config.num_subcarriers, grid_config.symbols_per_subframe)
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.rho = config.ar_coefficient

        if config.profile is ChannelProfile.TAPPED_DELAY_LINE:
            self._powers = config.tap_powers
            delays_s = np.asarray(config.tap_delays_ns) * 1e-9
            freqs = np.arange(self.shape[0]) * config.subcarrier_spacing_hz
            self._steering = np.exp(-2j * np.pi * np.outer(freqs, delays_s))
        else:
            self._powers = np.ones(1)
            self._steering = None

        self._taps: np.ndarray | None = None
        self._index: int | None = None
        self._last: ChannelRealization | None = None

    def _innovation(self) -> np.ndarray:
        n = self._powers.size
        w = self.rng.standard_normal(n) + 1j * self.rng.standard_normal(n)
        return w * np.sqrt(self._powers / 2.0)

    def _advance_to(self, subframe_index: int) -> None:
        # the stream starts from a stationary draw at subframe 0
        if self._taps is None:
            self._taps = self._innovation()
            self._index = 0
        steps = subframe_index - self._index
        if steps > 0:
            a = self.rho ** steps
            self._taps = a * self._taps + math.sqrt(max(0.0, 1.0 - a * a)) * self._innovation()
        self._index = subframe_index

    def realize(self, subframe_index: int) -> ChannelRealization:
        if self._index is not None and subframe_index < self._index:
            raise ValueError(
                f"fading stream is forward-only: requested subframe {subframe_index} after {self._index}"
            )
        if self._last is not None and subframe_index == self._index:
            return self._last

        if self.config.profile is ChannelProfile.AWGN:
            self._taps = np.ones(1, dtype=complex)
            self._index = subframe_index
            per_subcarrier = np.ones(self.shape[0])
        else:
            self._advance_to(subframe_index)
            if self._steering is None:
                per_subcarrier = np.full(self.shape[0], float(np.abs(self._taps[0]) ** 2))
            else:
                per_subcarrier = np.abs(self._steering @ self._taps) ** 2

        gain = np.repeat(per_subcarrier[:, None], self.shape[1], axis=1)
        gain.setflags(write=False)
        self._last = ChannelRealization(gain=gain, subframe_index=subframe_index, taps=self._taps.copy())
        return self._last


def realize(
    config: ChannelConfig,
    subframe_index: int,
    grid_config: GridConfig | None = None,
    rng: np.random.Generator | None = None,
) -> ChannelRealization:
    """
    One-shot realization from a fresh stream seeded by `config.seed` (or `rng`).

    The stream is anchored at subframe 0 and advanced to `subframe_index`, so
    realizations k subframes apart correlate as the AR(1) coefficient to the k.
    """
    return FadingChannel(config, grid_config, rng).realize(subframe_index)


def per_re_sinr(grid: ResourceGrid, realization: ChannelRealization) -> np.ndarray:
    """Linear SINR of every RE: signal*gain / (interference + noise)."""
    if realization.gain.shape != grid.shape:
        raise ConfigurationError(f"channel gain shape {realization.gain.shape} does not match grid {grid.shape}")
    return grid.signal_power * realization.gain / (grid.interference_power + grid.noise_power)
