"""
HARQ retransmission model and retransmission-induced latency.

Attempts of one block are i.i.d. Bernoulli trials with success probability
p = 1 - BLER, so the retransmission count is geometric and the mean
retransmission-induced latency is BLER * tau_wait / (1 - BLER). The capped
variant stops after `max_retx` retransmissions and drops the block.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from shared.models import HarqRecord

from .errors import ConfigurationError, LatencyDivergenceError

logger = logging.getLogger(__name__)


class HarqMode(str, Enum):
    UNBOUNDED = "unbounded"
    CAPPED = "capped"


@dataclass(frozen=True)
class HarqConfig:
    """Constant inter-attempt wait and optional retransmission cap."""
    tau_wait_ms: float = 8.0
    max_retx: int = 4
    mode: HarqMode = HarqMode.CAPPED

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", HarqMode(self.mode))
        except ValueError:
            raise ConfigurationError(f"harq.harq_mode must be unbounded or capped, got {self.mode!r}") from None
        if not self.tau_wait_ms > 0:
            raise ConfigurationError(f"harq.tau_wait_ms must be > 0, got {self.tau_wait_ms}")
        if int(self.max_retx) != self.max_retx or self.max_retx < 0:
            raise ConfigurationError(f"harq.max_retx must be an integer >= 0, got {self.max_retx}")


def _check_bler(bler: float) -> None:
    if bler < 0:
        raise ValueError(f"BLER must be >= 0, got {bler}")
    if bler >= 1:
        raise LatencyDivergenceError(f"mean retransmission latency diverges at BLER = {bler}")


def analytic_mean_retx(bler: float) -> float:
    """Mean of the geometric retransmission count, BLER / (1 - BLER)."""
    _check_bler(bler)
    return bler / (1.0 - bler)


def analytic_latency(bler: float, tau_wait_ms: float) -> float:
    """Mean retransmission-induced latency (ms) without a cap."""
    return analytic_mean_retx(bler) * tau_wait_ms


def analytic_latency_slope(bler: float, tau_wait_ms: float) -> float:
    """d(analytic_latency)/d(BLER) = tau_wait / (1 - BLER)^2."""
    _check_bler(bler)
    return tau_wait_ms / (1.0 - bler) ** 2


def capped_mean_retx(bler: float, max_retx: int) -> float:
    """E[min(N, max_retx)] for geometric N; dropped blocks count max_retx."""
    if not 0 <= bler <= 1:
        raise ValueError(f"BLER must be in [0, 1], got {bler}")
    k = np.arange(1, max_retx + 1)
    delivered = float(np.sum(k * bler ** k * (1.0 - bler)))
    return delivered + max_retx * bler ** (max_retx + 1)


def capped_mean_latency(bler: float, tau_wait_ms: float, max_retx: int) -> float:
    return tau_wait_ms * capped_mean_retx(bler, max_retx)


def capped_drop_prob(bler: float, max_retx: int) -> float:
    """Probability that all 1 + max_retx attempts fail."""
    return bler ** (max_retx + 1)


def run_block(p_success: float, config: HarqConfig, rng: np.random.Generator) -> HarqRecord:
    """Draw the attempt trail of one block."""
    if not 0 <= p_success <= 1:
        raise ValueError(f"p_success must be in [0, 1], got {p_success}")

    if p_success == 0:
        if config.mode is HarqMode.UNBOUNDED:
            raise ValueError("p_success = 0 never terminates without a retransmission cap")
        failures = config.max_retx + 1
    else:
        failures = int(rng.geometric(p_success)) - 1

    if config.mode is HarqMode.CAPPED and failures > config.max_retx:
        n_retx, delivered = config.max_retx, False
        outcomes = (False,) * (config.max_retx + 1)
    else:
        n_retx, delivered = failures, True
        outcomes = (False,) * failures + (True,)

    return HarqRecord(
        n_retx=n_retx,
        latency_ms=n_retx * config.tau_wait_ms,
        delivered=delivered,
        success_prob_used=p_success,
        outcomes=outcomes,
    )


@dataclass(frozen=True, eq=False)
class BlockBatch:
    """Vectorized outcome of many independent blocks."""
    n_retx: np.ndarray
    delivered: np.ndarray
    tau_wait_ms: float

    @property
    def latency_ms(self) -> np.ndarray:
        return self.n_retx * self.tau_wait_ms

    @property
    def mean_latency_ms(self) -> float:
        return float(self.latency_ms.mean())

    @property
    def attempts(self) -> int:
        return int(self.n_retx.sum() + self.n_retx.size)

    @property
    def success_fraction(self) -> float:
        """Successful attempts over all attempts."""
        return float(self.delivered.sum()) / self.attempts

    @property
    def drop_rate(self) -> float:
        return 1.0 - float(self.delivered.mean())


def run_blocks(p_success: float, config: HarqConfig, n_blocks: int, rng: np.random.Generator) -> BlockBatch:
    """Same law as `run_block`, drawn for `n_blocks` blocks at once."""
    if not 0 <= p_success <= 1:
        raise ValueError(f"p_success must be in [0, 1], got {p_success}")
    if p_success == 0:
        if config.mode is HarqMode.UNBOUNDED:
            raise ValueError("p_success = 0 never terminates without a retransmission cap")
        failures = np.full(n_blocks, config.max_retx + 1)
    else:
        failures = rng.geometric(p_success, size=n_blocks) - 1

    if config.mode is HarqMode.CAPPED:
        delivered = failures <= config.max_retx
        n_retx = np.minimum(failures, config.max_retx)
    else:
        delivered = np.ones(n_blocks, dtype=bool)
        n_retx = failures
    return BlockBatch(n_retx=n_retx, delivered=delivered, tau_wait_ms=config.tau_wait_ms)
