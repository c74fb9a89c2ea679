"""Shared data models used across the simulator core."""

import math
from dataclasses import dataclass, field, asdict
from enum import IntEnum


class ReKind(IntEnum):
    """Resource element label."""
    DATA = 0
    PILOT = 1
    CONTROL = 2


@dataclass(frozen=True)
class ResourceElement:
    """One subcarrier x one OFDM symbol."""
    subcarrier: int
    symbol: int
    kind: ReKind


@dataclass(frozen=True)
class CqiReport:
    """Quantized channel-quality feedback produced by the receiver."""
    cqi: int
    generated_subframe: int
    estimated_sinr_db: float


@dataclass(frozen=True)
class HarqRecord:
    """Outcome trail of one transport block."""
    n_retx: int
    latency_ms: float
    delivered: bool
    success_prob_used: float
    outcomes: tuple[bool, ...] = field(default=())

    @property
    def attempts(self) -> int:
        return self.n_retx + 1

    @property
    def failures(self) -> int:
        return self.n_retx if self.delivered else self.n_retx + 1


@dataclass
class PointMetrics:
    """Closed-loop statistics for one (strategy, SINR) sweep point."""
    strategy: str
    target_sinr_db: float
    actual_sinr_db: float
    interference_power_dbm: float
    bler: float
    bler_ci_low: float
    bler_ci_high: float
    throughput_bps: float
    throughput_ceiling_bps: float
    median_cqi: float
    median_cqi_sinr_db: float
    median_estimated_sinr_db: float
    mean_effective_sinr_db: float
    mean_retx_latency_ms: float
    mean_n_retx: float
    residual_drop_rate: float
    analytic_latency_ms: float
    capped_latency_ms: float
    subframes: int
    attempts: int

    @property
    def throughput_mbps(self) -> float:
        return self.throughput_bps / 1e6

    @property
    def sinr_gap_db(self) -> float:
        """Median estimated SINR minus measured actual SINR."""
        return self.median_estimated_sinr_db - self.actual_sinr_db

    def to_dict(self) -> dict:
        row = asdict(self)
        row["throughput_mbps"] = self.throughput_mbps
        row["sinr_gap_db"] = self.sinr_gap_db
        # JSON has no inf or nan
        return {
            key: (None if isinstance(value, float) and not math.isfinite(value) else value)
            for key, value in row.items()
        }
