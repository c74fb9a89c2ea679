"""
Mergeable streaming statistics for the simulation loop.

Per-worker instances are reduced with `merge`; counts and histograms add,
means and second moments combine with the pairwise update.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .csi import MAX_CQI


class QuantileSketch:
    """Fixed-bin histogram over [low, high]; values outside are clamped to the edge bins."""

    def __init__(self, low: float = -60.0, high: float = 80.0, bin_width: float = 0.05):
        if not high > low or bin_width <= 0:
            raise ValueError(f"invalid sketch range [{low}, {high}] / bin width {bin_width}")
        self.low = float(low)
        self.high = float(high)
        self.bin_width = float(bin_width)
        self.counts = np.zeros(int(math.ceil((self.high - self.low) / self.bin_width)), dtype=np.int64)

    @property
    def count(self) -> int:
        return int(self.counts.sum())

    @property
    def error_bound(self) -> float:
        """Worst-case quantile error inside the range (half a bin)."""
        return self.bin_width / 2.0

    def _bin(self, value: float) -> int:
        index = int((value - self.low) // self.bin_width)
        return min(max(index, 0), self.counts.size - 1)

    def update(self, value: float) -> "QuantileSketch":
        if not math.isnan(value):
            self.counts[self._bin(value)] += 1
        return self

    def compatible_with(self, other: "QuantileSketch") -> bool:
        return (self.low, self.high, self.bin_width) == (other.low, other.high, other.bin_width)

    def merge(self, other: "QuantileSketch") -> "QuantileSketch":
        if not self.compatible_with(other):
            raise ValueError("cannot merge sketches with different bins")
        merged = QuantileSketch(self.low, self.high, self.bin_width)
        merged.counts = self.counts + other.counts
        return merged

    def quantile(self, q: float) -> float:
        """Bin center holding the q-th quantile; NaN when empty."""
        if not 0 <= q <= 1:
            raise ValueError(f"quantile must be in [0, 1], got {q}")
        total = self.count
        if total == 0:
            return float("nan")
        rank = max(1, math.ceil(q * total))
        index = int(np.searchsorted(np.cumsum(self.counts), rank))
        return self.low + (index + 0.5) * self.bin_width

    def median(self) -> float:
        return self.quantile(0.5)


class CqiHistogram:
    """Exact 16-bin CQI histogram."""

    def __init__(self):
        self.counts = np.zeros(MAX_CQI + 1, dtype=np.int64)

    @property
    def count(self) -> int:
        return int(self.counts.sum())

    def update(self, cqi: int) -> "CqiHistogram":
        if not 0 <= cqi <= MAX_CQI:
            raise ValueError(f"CQI must be in [0, {MAX_CQI}], got {cqi}")
        self.counts[cqi] += 1
        return self

    def merge(self, other: "CqiHistogram") -> "CqiHistogram":
        merged = CqiHistogram()
        merged.counts = self.counts + other.counts
        return merged

    def _value_at(self, rank: int) -> int:
        # rank is 0-based in the sorted stream
        return int(np.searchsorted(np.cumsum(self.counts), rank + 1))

    def median(self) -> float:
        """Sorted-stream median; mean of the two middle values for even counts."""
        n = self.count
        if n == 0:
            return float("nan")
        if n % 2:
            return float(self._value_at(n // 2))
        return (self._value_at(n // 2 - 1) + self._value_at(n // 2)) / 2.0


@dataclass
class StreamingStats:
    """Running count, mean and M2 (Welford), with an optional quantile sketch."""
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    sketch: QuantileSketch | None = field(default=None, repr=False)

    @classmethod
    def of(cls, values, sketch: QuantileSketch | None = None) -> "StreamingStats":
        stats = cls(sketch=sketch)
        for value in values:
            stats.update(value)
        return stats

    def update(self, value: float) -> "StreamingStats":
        value = float(value)
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)
        if self.sketch is not None:
            self.sketch.update(value)
        return self

    def merge(self, other: "StreamingStats") -> "StreamingStats":
        """Combined statistics of both streams; neither input is modified."""
        n = self.count + other.count
        if n == 0:
            mean, m2 = 0.0, 0.0
        else:
            delta = other.mean - self.mean
            mean = self.mean + delta * other.count / n
            m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n

        if self.sketch is not None and other.sketch is not None:
            sketch = self.sketch.merge(other.sketch)
        else:
            sketch = self.sketch or other.sketch
        return StreamingStats(count=n, mean=mean, m2=m2, sketch=sketch)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def median(self) -> float:
        if self.sketch is None:
            raise ValueError("median needs a quantile sketch")
        return self.sketch.median()


def update(stats: StreamingStats, value: float) -> StreamingStats:
    return stats.update(value)


def merge(a: StreamingStats, b: StreamingStats) -> StreamingStats:
    return a.merge(b)


def bler_ci(errors: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for an error fraction."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= errors <= trials:
        raise ValueError(f"errors must be in [0, {trials}], got {errors}")
    if not 0 < level < 1:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")

    z = float(norm.ppf(0.5 + level / 2.0))
    p = errors / trials
    z2n = z * z / trials
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    return max(0.0, center - half), min(1.0, center + half)
