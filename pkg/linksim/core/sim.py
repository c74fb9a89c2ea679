"""
Closed-loop Monte Carlo driver.

Per subframe: realize the channel, estimate pilot SINR and report CQI on
schedule, select the MCS from the CQI in force, evaluate the effective data
SINR, draw the block's HARQ trail and accumulate metrics. Sweep points are
calibrated to a target actual SINR and run independently.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from multiprocessing import Pool

import numpy as np
from scipy.optimize import brentq

from shared.models import PointMetrics
from shared.units import dbm_to_mw, linear_to_db, mw_to_dbm

from .channel import ChannelRealization, FadingChannel, per_re_sinr
from .csi import data_sinr_effective, FeedbackLoop, is_report_subframe, pilot_sinr_estimate, wideband_power_sums
from .errors import CalibrationError
from .grid import ResourceGrid, build_grid
from .harq import HarqMode, analytic_latency, capped_mean_latency, run_block
from .interference import InterferenceProfile, Strategy, apply_interference, targeted_re_count
from .linkadapt import (
    McsTable,
    OuterLoop,
    best_cqi,
    block_error_prob,
    delivered_bits,
    select_mcs,
    throughput_ceiling_bps,
)
from .metrics import CqiHistogram, QuantileSketch, StreamingStats, bler_ci
from .scenario import ScenarioConfig

logger = logging.getLogger(__name__)

# unbounded HARQ cannot draw from p = 0; this stands in for a link that never decodes
MIN_SUCCESS_PROB = 1e-6

_POWER_SEARCH_FLOOR_DBM = -300.0
_POWER_SEARCH_CEILING_DBM = 300.0


def scenario_grid(scenario: ScenarioConfig) -> ResourceGrid:
    """Interference-free grid with the scenario's noise floor."""
    return build_grid(scenario.grid, noise_power=scenario.channel.noise_power)


def mcs_table(scenario: ScenarioConfig) -> McsTable:
    return McsTable.from_csv(scenario.linkadapt.mcs_table_csv, scenario.csi.mapping)


def _unit_gain(grid: ResourceGrid) -> ChannelRealization:
    return ChannelRealization(gain=np.ones(grid.shape), subframe_index=0, taps=np.ones(1, dtype=complex))


def expected_actual_sinr_db(grid: ResourceGrid, profile: InterferenceProfile) -> float:
    """Long-run wideband data SINR (dB) for a profile; mean channel gain is 1."""
    loaded = apply_interference(grid, profile)
    signal, impairment = wideband_power_sums(loaded, _unit_gain(loaded), loaded.data_mask)
    return float(linear_to_db(signal / impairment))


def calibrate_interference_power(target_actual_sinr_db: float, scenario: ScenarioConfig) -> float:
    """
    Total interference power (mW) that puts the long-run actual SINR at the target.

    Root-finds over power in dBm. Strategy `none`, and a target equal to the
    interference-free SINR, need no interference and return 0.

    Raises:
        CalibrationError: target above the interference-free SINR, or the
            strategy cannot touch any data RE.
    """
    profile = scenario.interference
    if profile.strategy is Strategy.NONE:
        return 0.0

    grid = scenario_grid(scenario)
    clean_db = expected_actual_sinr_db(grid, profile.with_power(0.0))
    if target_actual_sinr_db > clean_db + 1e-9:
        raise CalibrationError(
            f"target actual SINR {target_actual_sinr_db} dB is above the interference-free {clean_db:.2f} dB"
        )
    if target_actual_sinr_db >= clean_db - 1e-9:
        return 0.0
    if targeted_re_count(grid, profile) == 0:
        raise CalibrationError(f"strategy {profile.strategy.value} targets no REs on this grid")

    def gap(power_dbm: float) -> float:
        return expected_actual_sinr_db(grid, profile.with_power(dbm_to_mw(power_dbm))) - target_actual_sinr_db

    if gap(_POWER_SEARCH_CEILING_DBM) >= 0:
        raise CalibrationError(
            f"strategy {profile.strategy.value} cannot pull actual SINR down to {target_actual_sinr_db} dB"
        )
    power_dbm = brentq(gap, _POWER_SEARCH_FLOOR_DBM, _POWER_SEARCH_CEILING_DBM, xtol=1e-9)
    logger.debug(
        f"Calibrated {profile.strategy.value} to {target_actual_sinr_db} dB: {power_dbm:.4f} dBm total"
    )
    return dbm_to_mw(power_dbm)


def point_streams(master_seed: int, strategy: Strategy, target_sinr_db: float | None) -> tuple[np.random.Generator, ...]:
    """Independent (channel, harq) generators owned by one sweep point."""
    key = (strategy.code,) if target_sinr_db is None else (strategy.code, int(round((target_sinr_db + 1000.0) * 1000)))
    channel_seq, harq_seq = np.random.SeedSequence(master_seed, spawn_key=key).spawn(2)
    return np.random.default_rng(channel_seq), np.random.default_rng(harq_seq)


@dataclass
class PointAccumulator:
    """Running totals for one sweep point."""
    subframes: int = 0
    attempts: int = 0
    failures: int = 0
    drops: int = 0
    delivered_bits: float = 0.0
    signal_sum: float = 0.0
    impairment_sum: float = 0.0
    latency: StreamingStats = field(default_factory=StreamingStats)
    n_retx: StreamingStats = field(default_factory=StreamingStats)
    effective_sinr: StreamingStats = field(default_factory=StreamingStats)
    estimated_sinr: StreamingStats = field(default_factory=lambda: StreamingStats(sketch=QuantileSketch()))
    cqi: CqiHistogram = field(default_factory=CqiHistogram)


def run_point(
    scenario: ScenarioConfig,
    target_sinr_db: float | None = None,
    strategy: Strategy | str | None = None,
) -> PointMetrics:
    """
    Run the closed loop for `subframes_per_point` subframes.

    `strategy` defaults to the scenario's interference strategy. With a
    target, the interference power is calibrated first; without one the
    configured total power is used as is.
    """
    strategy = Strategy.parse(strategy) if strategy is not None else scenario.interference.strategy
    scenario = replace(scenario, interference=replace(scenario.interference, strategy=strategy))
    profile = scenario.interference
    if target_sinr_db is not None:
        profile = profile.with_power(calibrate_interference_power(target_sinr_db, scenario))

    grid = apply_interference(scenario_grid(scenario), profile)
    table = mcs_table(scenario)
    csi, harq = scenario.csi, scenario.harq
    channel_rng, harq_rng = point_streams(scenario.master_seed, strategy, target_sinr_db)
    channel = FadingChannel(scenario.channel, scenario.grid, channel_rng)
    feedback = FeedbackLoop(csi)
    outer = OuterLoop(scenario.linkadapt.outer_loop, csi.mapping)
    acc = PointAccumulator()

    for t in range(scenario.subframes_per_point):
        realization = channel.realize(t)

        if is_report_subframe(csi, t):
            estimate = pilot_sinr_estimate(grid, realization, csi.eesm_beta)
            cqi = None
            if table.has_eesm_betas:
                pilot_sinr = per_re_sinr(grid, realization)[grid.pilot_mask]
                cqi = best_cqi(pilot_sinr, table, csi.eesm_beta, csi.mapping)
            report = feedback.observe(t, estimate, cqi)
            acc.estimated_sinr.update(estimate)
            acc.cqi.update(report.cqi)

        mcs = select_mcs(outer.adjust(feedback.cqi_at(t)), table)
        effective = data_sinr_effective(grid, realization, beta=mcs.beta_or(csi.eesm_beta))
        p_success = 1.0 - block_error_prob(mcs, effective)
        if harq.mode is HarqMode.UNBOUNDED:
            p_success = max(p_success, MIN_SUCCESS_PROB)
        record = run_block(p_success, harq, harq_rng)
        outer.update(record.outcomes)

        signal, impairment = wideband_power_sums(grid, realization, grid.data_mask)
        acc.subframes += 1
        acc.attempts += record.attempts
        acc.failures += record.failures
        acc.drops += not record.delivered
        acc.delivered_bits += delivered_bits(mcs, grid, record.delivered)
        acc.signal_sum += signal
        acc.impairment_sum += impairment
        acc.latency.update(record.latency_ms)
        acc.n_retx.update(record.n_retx)
        acc.effective_sinr.update(effective)

    metrics = _finish(acc, scenario, grid, table, target_sinr_db, profile)
    if outer.config.enabled:
        logger.debug(f"{strategy.value}: outer-loop offset settled at {outer.offset_db:.2f} dB")
    logger.info(
        f"{strategy.value} @ {metrics.actual_sinr_db:.2f} dB: BLER {metrics.bler:.3f}, "
        f"{metrics.throughput_mbps:.2f} Mbps, retx latency {metrics.mean_retx_latency_ms:.3f} ms"
    )
    return metrics


def _finish(
    acc: PointAccumulator,
    scenario: ScenarioConfig,
    grid: ResourceGrid,
    table: McsTable,
    target_sinr_db: float | None,
    profile: InterferenceProfile,
) -> PointMetrics:
    harq = scenario.harq
    subframe_s = scenario.channel.subframe_duration_s
    overhead = scenario.linkadapt.overhead_factor

    bler = acc.failures / acc.attempts
    ci_low, ci_high = bler_ci(acc.failures, acc.attempts)
    actual_db = float(linear_to_db(acc.signal_sum / acc.impairment_sum))
    median_cqi = acc.cqi.median()

    return PointMetrics(
        strategy=profile.strategy.value,
        target_sinr_db=actual_db if target_sinr_db is None else float(target_sinr_db),
        actual_sinr_db=actual_db,
        interference_power_dbm=mw_to_dbm(profile.total_power),
        bler=bler,
        bler_ci_low=ci_low,
        bler_ci_high=ci_high,
        throughput_bps=acc.delivered_bits * overhead / (acc.attempts * subframe_s),
        throughput_ceiling_bps=throughput_ceiling_bps(table, grid, overhead, subframe_s),
        median_cqi=median_cqi,
        median_cqi_sinr_db=scenario.csi.mapping.cqi_to_sinr(median_cqi),
        median_estimated_sinr_db=acc.estimated_sinr.median(),
        mean_effective_sinr_db=acc.effective_sinr.mean,
        mean_retx_latency_ms=acc.latency.mean,
        mean_n_retx=acc.n_retx.mean,
        residual_drop_rate=acc.drops / acc.subframes,
        analytic_latency_ms=analytic_latency(bler, harq.tau_wait_ms) if bler < 1 else math.inf,
        capped_latency_ms=capped_mean_latency(bler, harq.tau_wait_ms, harq.max_retx),
        subframes=acc.subframes,
        attempts=acc.attempts,
    )


def _run_point_task(scenario: ScenarioConfig, strategy: Strategy, target_sinr_db: float) -> PointMetrics:
    return run_point(scenario, target_sinr_db, strategy)


def run_sweep(scenario: ScenarioConfig) -> list[PointMetrics]:
    """One PointMetrics per (strategy, target SINR), in strategy-major order."""
    tasks = [(scenario, strategy, target) for strategy in scenario.strategies for target in scenario.sweep_sinr_db]
    logger.info(
        f"Sweeping {len(scenario.strategies)} strategies x {len(scenario.sweep_sinr_db)} points, "
        f"{scenario.subframes_per_point} subframes each, {scenario.workers} worker(s)"
    )
    if scenario.workers > 1 and len(tasks) > 1:
        with Pool(min(scenario.workers, len(tasks))) as pool:
            return pool.starmap(_run_point_task, tasks)
    return [_run_point_task(*task) for task in tasks]
