"""
CQI -> MCS selection and the calibrated block-error abstraction.

Each MCS row has a logistic BLER waterfall whose threshold is solved so that
BLER is exactly 10 % at the SINR the CQI mapping assigns to that row. With
perfect CSI, link adaptation therefore meets the 10 % target by construction.
An optional outer loop backs the CQI off on HARQ feedback for stale CSI.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from shared.units import linear_to_db

from .csi import DEFAULT_MAPPING, MAX_CQI, CqiMapping, eesm
from .errors import ConfigurationError
from .grid import ResourceGrid

logger = logging.getLogger(__name__)

TARGET_BLER = 0.10
DEFAULT_SLOPE_PER_DB = 2.0
DEFAULT_TABLE_PATH = Path(__file__).parent.parent / "config" / "mcs_table.csv"


@dataclass(frozen=True)
class McsEntry:
    """One modulation-and-coding row."""
    index: int
    spectral_efficiency: float
    bler_threshold_db: float
    bler_slope: float
    eesm_beta: float | None = None

    def beta_or(self, default: float) -> float:
        """EESM beta for this row, falling back to `default` when the table has none."""
        return self.eesm_beta if self.eesm_beta is not None else default


def calibrated_threshold(anchor_sinr_db: float, slope: float, target_bler: float = TARGET_BLER) -> float:
    """Logistic midpoint placing BLER = target_bler at `anchor_sinr_db`."""
    return anchor_sinr_db - math.log((1.0 - target_bler) / target_bler) / slope


class McsTable:
    """16 rows aligned with CQI 0..15; thresholds always derived, never read."""

    def __init__(self, entries: list[McsEntry]):
        if len(entries) != MAX_CQI + 1:
            raise ConfigurationError(f"MCS table needs {MAX_CQI + 1} rows, got {len(entries)}")
        entries = sorted(entries, key=lambda e: e.index)
        if [e.index for e in entries] != list(range(MAX_CQI + 1)):
            raise ConfigurationError("MCS table indices must be exactly 0..15")
        for prev, cur in zip(entries, entries[1:]):
            if cur.spectral_efficiency <= prev.spectral_efficiency:
                raise ConfigurationError(f"MCS spectral efficiency must increase strictly (row {cur.index})")
            if cur.bler_threshold_db <= prev.bler_threshold_db:
                raise ConfigurationError(f"MCS BLER threshold must increase strictly (row {cur.index})")
        for entry in entries:
            if entry.spectral_efficiency <= 0 or entry.bler_slope <= 0:
                raise ConfigurationError(f"MCS row {entry.index} needs positive efficiency and slope")
            if entry.eesm_beta is not None and not entry.eesm_beta > 0:
                raise ConfigurationError(f"MCS row {entry.index} needs a positive EESM beta, got {entry.eesm_beta}")
        self.entries = entries

    def __getitem__(self, index: int) -> McsEntry:
        return self.entries[index]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def top(self) -> McsEntry:
        return self.entries[-1]

    @property
    def has_eesm_betas(self) -> bool:
        return any(e.eesm_beta is not None for e in self.entries)

    @classmethod
    def from_rows(
        cls,
        rows: list[tuple],
        mapping: CqiMapping = DEFAULT_MAPPING,
    ) -> "McsTable":
        """
        Build from (index, efficiency, slope) or (index, efficiency, slope, beta)
        rows, anchoring thresholds on `mapping`. A beta of None defers to csi.eesm_beta.
        """
        entries = []
        for row in rows:
            index, efficiency, slope = row[:3]
            beta = row[3] if len(row) > 3 else None
            entries.append(McsEntry(
                index=int(index),
                spectral_efficiency=float(efficiency),
                bler_threshold_db=calibrated_threshold(mapping.cqi_to_sinr(int(index)), float(slope)),
                bler_slope=float(slope),
                eesm_beta=None if beta is None else float(beta),
            ))
        return cls(entries)

    @classmethod
    def from_csv(cls, path: Path | str | None = None, mapping: CqiMapping = DEFAULT_MAPPING) -> "McsTable":
        """Load index, efficiency, optional slope and optional beta columns; blank cells use the defaults."""
        path = Path(path) if path is not None else DEFAULT_TABLE_PATH
        try:
            with open(path, "r", newline="") as f:
                reader = csv.DictReader(row for row in f if not row.lstrip().startswith("#"))
                rows = [
                    (
                        int(r["index"]),
                        float(r["efficiency"]),
                        float(r.get("slope") or DEFAULT_SLOPE_PER_DB),
                        float(r["beta"]) if r.get("beta") else None,
                    )
                    for r in reader
                ]
        except (OSError, KeyError, ValueError) as e:
            raise ConfigurationError(f"linkadapt.mcs_table_csv: cannot read {path}: {e}") from e
        logger.debug(f"Loaded {len(rows)} MCS rows from {path}")
        return cls.from_rows(rows, mapping)


def select_mcs(cqi: int, table: McsTable) -> McsEntry:
    """Identity CQI -> MCS alignment; CQI 0 (outage) falls back to the lowest MCS."""
    if not 0 <= cqi <= MAX_CQI:
        raise ConfigurationError(f"CQI must be in [0, {MAX_CQI}], got {cqi}")
    return table[max(cqi, 1)]


def block_error_prob(mcs: McsEntry, actual_sinr_db: float) -> float:
    """Logistic waterfall 1 / (1 + exp(slope * (sinr - threshold)))."""
    x = mcs.bler_slope * (actual_sinr_db - mcs.bler_threshold_db)
    # exp overflow guard; the logistic is already 0 or 1 to double precision there
    if x > 700:
        return 0.0
    if x < -700:
        return 1.0
    return 1.0 / (1.0 + math.exp(x))


def delivered_bits(mcs: McsEntry, grid: ResourceGrid, success: bool) -> float:
    return mcs.spectral_efficiency * grid.data_re_count if success else 0.0


def throughput_ceiling_bps(
    table: McsTable,
    grid: ResourceGrid,
    overhead_factor: float,
    subframe_duration_s: float = 1e-3,
) -> float:
    """Rate of the top MCS delivering every subframe."""
    return delivered_bits(table.top, grid, True) * overhead_factor / subframe_duration_s


def best_cqi(pilot_sinr: np.ndarray, table: McsTable, default_beta: float, mapping: CqiMapping = DEFAULT_MAPPING) -> int:
    """
    Highest CQI whose effective pilot SINR, taken with that row's own EESM
    beta, reaches the SINR the mapping assigns to it; 0 when no row does.

    With a single beta for every row this is `mapping.sinr_to_cqi` of the
    pilot estimate.
    """
    for entry in reversed(table.entries[1:]):
        effective_db = float(linear_to_db(eesm(pilot_sinr, entry.beta_or(default_beta))))
        if effective_db >= mapping.cqi_to_sinr(entry.index) - mapping.slope_db * 1e-9:
            return entry.index
    return 0


@dataclass(frozen=True)
class OuterLoopConfig:
    """HARQ-driven SINR back-off applied on top of the reported CQI."""
    enabled: bool = False
    target_bler: float = TARGET_BLER
    step_up_db: float = 1.0
    offset_min_db: float = -20.0
    offset_max_db: float = 20.0

    def __post_init__(self):
        if not isinstance(self.enabled, bool):
            raise ConfigurationError(f"linkadapt.olla_enabled must be true or false, got {self.enabled!r}")
        if not 0 < self.target_bler < 1:
            raise ConfigurationError(f"linkadapt.olla_target_bler must be in (0, 1), got {self.target_bler}")
        if not self.step_up_db > 0:
            raise ConfigurationError(f"linkadapt.olla_step_up_db must be > 0, got {self.step_up_db}")
        if not self.offset_min_db <= 0 <= self.offset_max_db:
            raise ConfigurationError("linkadapt.olla_offset_min_db <= 0 <= linkadapt.olla_offset_max_db must hold")

    @property
    def step_down_db(self) -> float:
        """ACK step that balances `step_up_db` exactly at the target BLER."""
        return self.step_up_db * self.target_bler / (1.0 - self.target_bler)


class OuterLoop:
    """
    Outer-loop link adaptation for one run.

    A NACK raises the offset by `step_up_db` and an ACK lowers it by
    `step_down_db`. The CQI in force is re-quantized after subtracting the
    offset from its mapped SINR, so long-run attempt BLER settles at the
    target unless the offset sits on a clamp.
    """

    def __init__(self, config: OuterLoopConfig, mapping: CqiMapping = DEFAULT_MAPPING):
        self.config = config
        self.mapping = mapping
        self.offset_db = 0.0

    def adjust(self, cqi: int) -> int:
        if not self.config.enabled or cqi == 0:
            return cqi
        return self.mapping.sinr_to_cqi(self.mapping.cqi_to_sinr(cqi) - self.offset_db)

    def update(self, outcomes: Iterable[bool]) -> float:
        """Apply one ACK/NACK per attempt; returns the new offset."""
        if not self.config.enabled:
            return self.offset_db
        config = self.config
        for decoded in outcomes:
            self.offset_db += -config.step_down_db if decoded else config.step_up_db
            self.offset_db = min(config.offset_max_db, max(config.offset_min_db, self.offset_db))
        return self.offset_db
