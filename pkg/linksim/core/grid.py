"""
OFDM resource grid for one downlink subframe.

Rows are subcarriers, columns are OFDM symbols. Pilots follow a single-port
cell-specific reference signal pattern: pilot symbols carry a pilot on every
`pilot_subcarrier_period`-th subcarrier, offset by a per-symbol shift.
Powers are linear (mW); the grid is immutable once built.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable

import numpy as np

from shared.models import ReKind, ResourceElement

from .errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridConfig:
    """Subframe geometry. Defaults describe a 10 MHz carrier, normal CP."""
    num_rb: int = 50
    subcarriers_per_rb: int = 12
    symbols_per_subframe: int = 14
    pilot_symbol_indices: tuple[int, ...] = (0, 4, 7, 11)
    pilot_subcarrier_period: int = 6
    pilot_subcarrier_shifts: tuple[int, ...] = (0, 3, 0, 3)
    control_symbol_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pilot_symbol_indices", tuple(int(s) for s in self.pilot_symbol_indices))
        object.__setattr__(self, "pilot_subcarrier_shifts", tuple(int(s) for s in self.pilot_subcarrier_shifts))

        for name in ("num_rb", "subcarriers_per_rb", "symbols_per_subframe", "pilot_subcarrier_period"):
            if int(getattr(self, name)) <= 0:
                raise ConfigurationError(f"grid.{name} must be a positive integer, got {getattr(self, name)}")
        if len(self.pilot_symbol_indices) != len(self.pilot_subcarrier_shifts):
            raise ConfigurationError(
                "grid.pilot_subcarrier_shifts must have one entry per pilot symbol "
                f"({len(self.pilot_subcarrier_shifts)} shifts for {len(self.pilot_symbol_indices)} symbols)"
            )
        if len(set(self.pilot_symbol_indices)) != len(self.pilot_symbol_indices):
            raise ConfigurationError("grid.pilot_symbol_indices must not repeat")
        for symbol in self.pilot_symbol_indices:
            if not 0 <= symbol < self.symbols_per_subframe:
                raise ConfigurationError(
                    f"grid.pilot_symbol_indices entry {symbol} outside [0, {self.symbols_per_subframe})"
                )
        for shift in self.pilot_subcarrier_shifts:
            if not 0 <= shift < self.pilot_subcarrier_period:
                raise ConfigurationError(
                    f"grid.pilot_subcarrier_shifts entry {shift} outside [0, {self.pilot_subcarrier_period})"
                )
        if not 0 <= self.control_symbol_count <= self.symbols_per_subframe:
            raise ConfigurationError(
                f"grid.control_symbol_count must be in [0, {self.symbols_per_subframe}], "
                f"got {self.control_symbol_count}"
            )

    @property
    def num_subcarriers(self) -> int:
        return self.num_rb * self.subcarriers_per_rb

    @property
    def total_re_count(self) -> int:
        return self.num_subcarriers * self.symbols_per_subframe

    def shift_for(self, symbol: int) -> int | None:
        """Pilot frequency shift of a symbol, or None for a non-pilot symbol."""
        try:
            return self.pilot_subcarrier_shifts[self.pilot_symbol_indices.index(symbol)]
        except ValueError:
            return None

    def is_pilot(self, subcarrier: int, symbol: int) -> bool:
        shift = self.shift_for(symbol)
        return shift is not None and subcarrier % self.pilot_subcarrier_period == shift

    def classify(self, subcarrier: int, symbol: int) -> ReKind:
        if self.is_pilot(subcarrier, symbol):
            return ReKind.PILOT
        if symbol < self.control_symbol_count:
            return ReKind.CONTROL
        return ReKind.DATA


def _read_only(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ResourceGrid:
    """Labeled subframe with per-RE signal and interference power."""
    config: GridConfig
    kind: np.ndarray
    signal_power: np.ndarray
    interference_power: np.ndarray
    noise_power: float = field(default=1.0)

    def __post_init__(self):
        shape = (self.config.num_subcarriers, self.config.symbols_per_subframe)
        kind = np.array(self.kind, dtype=np.int8)
        kind.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "signal_power", _read_only(self.signal_power))
        object.__setattr__(self, "interference_power", _read_only(self.interference_power))
        object.__setattr__(self, "noise_power", float(self.noise_power))

        for name in ("kind", "signal_power", "interference_power"):
            if getattr(self, name).shape != shape:
                raise ConfigurationError(f"{name} has shape {getattr(self, name).shape}, grid is {shape}")
        for name in ("signal_power", "interference_power"):
            values = getattr(self, name)
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise ConfigurationError(f"{name} must be finite and non-negative")
        if not (np.isfinite(self.noise_power) and self.noise_power > 0):
            raise ConfigurationError(f"noise_power must be finite and positive, got {self.noise_power}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.kind.shape

    def mask(self, kind: ReKind) -> np.ndarray:
        return self.kind == int(kind)

    @cached_property
    def pilot_mask(self) -> np.ndarray:
        return self.mask(ReKind.PILOT)

    @cached_property
    def data_mask(self) -> np.ndarray:
        return self.mask(ReKind.DATA)

    @cached_property
    def control_mask(self) -> np.ndarray:
        return self.mask(ReKind.CONTROL)

    @cached_property
    def pilot_subcarriers(self) -> np.ndarray:
        """Subcarriers carrying a pilot in at least one symbol."""
        return np.flatnonzero(self.pilot_mask.any(axis=1))

    @property
    def data_re_count(self) -> int:
        return int(self.data_mask.sum())

    def resource_element(self, subcarrier: int, symbol: int) -> ResourceElement:
        return ResourceElement(subcarrier, symbol, ReKind(int(self.kind[subcarrier, symbol])))

    def with_interference(self, interference_power: np.ndarray) -> "ResourceGrid":
        return replace(self, interference_power=interference_power)

    def identical_to(self, other: "ResourceGrid") -> bool:
        """Element-wise equality of labels and powers."""
        return (
            self.config == other.config
            and self.noise_power == other.noise_power
            and np.array_equal(self.kind, other.kind)
            and np.array_equal(self.signal_power, other.signal_power)
            and np.array_equal(self.interference_power, other.interference_power)
        )


def build_grid(config: GridConfig, noise_power: float = 1.0) -> ResourceGrid:
    """Label every RE and initialize unit signal power and zero interference."""
    n_sc, n_sym = config.num_subcarriers, config.symbols_per_subframe
    kind = np.full((n_sc, n_sym), int(ReKind.DATA), dtype=np.int8)
    kind[:, : config.control_symbol_count] = int(ReKind.CONTROL)

    subcarriers = np.arange(n_sc)
    for symbol, shift in zip(config.pilot_symbol_indices, config.pilot_subcarrier_shifts):
        column = kind[:, symbol]
        column[subcarriers % config.pilot_subcarrier_period == shift] = int(ReKind.PILOT)

    grid = ResourceGrid(
        config=config,
        kind=kind,
        signal_power=np.ones((n_sc, n_sym)),
        interference_power=np.zeros((n_sc, n_sym)),
        noise_power=noise_power,
    )
    logger.debug(
        f"Built grid {n_sc}x{n_sym}: {int(grid.pilot_mask.sum())} pilot, "
        f"{grid.data_re_count} data, {int(grid.control_mask.sum())} control REs"
    )
    return grid


def res_from_mask(mask: np.ndarray) -> frozenset[tuple[int, int]]:
    return frozenset(zip(*(axis.tolist() for axis in np.nonzero(mask))))


def mask_from_res(grid: ResourceGrid, res: Iterable[tuple[int, int]]) -> np.ndarray:
    mask = np.zeros(grid.shape, dtype=bool)
    for subcarrier, symbol in res:
        mask[subcarrier, symbol] = True
    return mask


def pilot_res(grid: ResourceGrid) -> frozenset[tuple[int, int]]:
    return res_from_mask(grid.pilot_mask)


def data_res(grid: ResourceGrid) -> frozenset[tuple[int, int]]:
    return res_from_mask(grid.data_mask)


def control_res(grid: ResourceGrid) -> frozenset[tuple[int, int]]:
    return res_from_mask(grid.control_mask)


def grid_layout_rows(grid: ResourceGrid) -> list[dict]:
    """(subcarrier, symbol, kind) rows in subcarrier-major order."""
    elements = (grid.resource_element(sc, sym) for sc in range(grid.shape[0]) for sym in range(grid.shape[1]))
    return [{"subcarrier": e.subcarrier, "symbol": e.symbol, "kind": e.kind.name.lower()} for e in elements]
