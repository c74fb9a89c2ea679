import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linksim.core.channel import ChannelConfig, ChannelRealization, FadingChannel
from linksim.core.csi import (
    CqiMapping,
    FeedbackConfig,
    FeedbackLoop,
    cqi_to_sinr,
    data_sinr_effective,
    data_sinr_wideband,
    eesm,
    feedback_schedule,
    pilot_sinr_estimate,
    sinr_to_cqi,
)
from linksim.core.errors import ConfigurationError
from linksim.core.grid import GridConfig, build_grid
from linksim.core.interference import InterferenceProfile, Strategy, apply_interference


def flat(grid, gain=1.0):
    return ChannelRealization(gain=np.full(grid.shape, gain), subframe_index=0, taps=np.ones(1, dtype=complex))


def jammed(grid, strategy, total_power):
    return apply_interference(grid, InterferenceProfile(strategy, total_power=total_power))


def test_eesm_of_equal_values_is_that_value():
    assert eesm(np.full(10, 3.7)) == pytest.approx(3.7)


def test_eesm_is_dominated_by_weak_res():
    assert eesm(np.array([1000.0, 0.5])) == pytest.approx(0.5 + math.log(2), rel=1e-9)


def test_npi_estimate_is_snr(grid):
    for power in (0.0, 1.0, 1e3, 1e6):
        loaded = jammed(grid, Strategy.FREQ_DOMAIN_NPI, power)
        assert pilot_sinr_estimate(loaded, flat(loaded)) == pytest.approx(30.0, abs=1e-9)


def test_pilot_tone_estimate_near_zero_db(grid):
    # per-pilot-RE interference equal to the signal
    loaded = jammed(grid, Strategy.PILOT_TONES, 2800.0)
    expected = 10 * math.log10(1.0 / (1.0 + 1e-3))
    assert pilot_sinr_estimate(loaded, flat(loaded)) == pytest.approx(expected, abs=1e-9)


def test_estimate_scales_with_gain(grid):
    assert pilot_sinr_estimate(grid, flat(grid, 0.5)) == pytest.approx(30.0 + 10 * math.log10(0.5))


def test_empty_pilot_set_rejected():
    grid = build_grid(GridConfig(pilot_symbol_indices=(), pilot_subcarrier_shifts=()))
    with pytest.raises(ConfigurationError):
        pilot_sinr_estimate(grid, flat(grid))


def test_clean_data_estimate_matches_pilot_estimate(grid):
    assert data_sinr_effective(grid, flat(grid)) == pytest.approx(pilot_sinr_estimate(grid, flat(grid)))


def test_barrage_data_and_pilot_agree(grid):
    loaded = jammed(grid, Strategy.BARRAGE, 8400 * 0.25)
    real = flat(loaded)
    assert data_sinr_effective(loaded, real) == pytest.approx(pilot_sinr_estimate(loaded, real))


def test_npi_effective_sinr_direct_oracle(grid):
    loaded = jammed(grid, Strategy.FREQ_DOMAIN_NPI, 2800 * 100.0)
    real = flat(loaded)
    sinr = loaded.signal_power / (loaded.interference_power + loaded.noise_power)
    values = sinr[loaded.data_mask]
    oracle = -math.log(np.mean(np.exp(-values)))
    assert data_sinr_effective(loaded, real) == pytest.approx(10 * math.log10(oracle), rel=1e-9)


def test_empty_subset_rejected(grid):
    with pytest.raises(ConfigurationError):
        data_sinr_effective(grid, flat(grid), np.zeros(grid.shape, dtype=bool))


def test_subset_as_re_tuples(grid):
    value = data_sinr_effective(grid, flat(grid, 2.0), [(1, 1), (2, 2)])
    assert value == pytest.approx(30.0 + 10 * math.log10(2.0))


def test_wideband_sinr_is_ratio_of_sums(grid):
    loaded = jammed(grid, Strategy.FREQ_DOMAIN_NPI, 2800.0)
    expected = 8000 / (2800 * 1.0 + 8000 * 1e-3)
    assert data_sinr_wideband(loaded, flat(loaded)) == pytest.approx(10 * math.log10(expected))


def test_npi_gap_at_high_inr(grid):
    loaded = jammed(grid, Strategy.FREQ_DOMAIN_NPI, 2800 * 1e-2)
    real = flat(loaded)
    assert pilot_sinr_estimate(loaded, real) - data_sinr_effective(loaded, real) >= 5.0


def test_barrage_gap_within_one_step(grid):
    loaded = jammed(grid, Strategy.BARRAGE, 8400 * 0.5)
    real = flat(loaded)
    gap = pilot_sinr_estimate(loaded, real) - data_sinr_wideband(loaded, real)
    assert abs(gap) <= 2.11


@pytest.mark.parametrize("cqi, sinr", [(0, -9.0), (15, 22.65), (9, 9.99)])
def test_cqi_mapping(cqi, sinr):
    assert cqi_to_sinr(cqi) == pytest.approx(sinr)


@pytest.mark.parametrize("sinr, cqi", [(10.0, 9), (-20.0, 0), (40.0, 15), (-9.0, 0), (22.65, 15), (-6.89, 1)])
def test_sinr_to_cqi(sinr, cqi):
    assert sinr_to_cqi(sinr) == cqi


def test_all_levels_reachable():
    assert {sinr_to_cqi(cqi_to_sinr(c)) for c in range(16)} == set(range(16))


@given(st.floats(-9.0, 22.65), st.floats(-30.0, 40.0))
def test_quantizer_floor_and_monotone(sinr, other):
    cqi = sinr_to_cqi(sinr)
    assert cqi_to_sinr(cqi) <= sinr + 1e-6
    if other >= sinr:
        assert sinr_to_cqi(other) >= cqi


def test_custom_mapping():
    mapping = CqiMapping(slope_db=2.0, intercept_db=-10.0)
    assert mapping.sinr_to_cqi(0.0) == 5
    assert cqi_to_sinr(5, mapping) == 0.0


@pytest.mark.parametrize(
    "delay, t, expected",
    [(4, 13, 0), (4, 14, 10), (0, 10, 10), (4, 3, None), (4, 4, 0)],
)
def test_feedback_schedule(delay, t, expected):
    assert feedback_schedule(FeedbackConfig(period_subframes=10, delay_subframes=delay), t) == expected


def test_cold_start_uses_initial_cqi():
    loop = FeedbackLoop(FeedbackConfig(initial_cqi=15))
    loop.observe(0, -5.0)
    assert loop.cqi_at(3) == 15
    assert loop.cqi_at(4) == sinr_to_cqi(-5.0)


def test_loop_uses_newest_usable_report():
    loop = FeedbackLoop(FeedbackConfig())
    used = {}
    for t in range(30):
        loop.observe(t, float(t))
        used[t] = loop.cqi_at(t)
    assert used[13] == sinr_to_cqi(0.0)
    assert used[14] == sinr_to_cqi(10.0)
    assert used[29] == sinr_to_cqi(20.0)


def test_observe_only_on_report_subframes():
    loop = FeedbackLoop(FeedbackConfig())
    assert loop.observe(3, 10.0) is None
    report = loop.observe(20, 10.0)
    assert report.cqi == 9 and report.generated_subframe == 20


@pytest.mark.parametrize("kwargs", [{"period_subframes": 0}, {"delay_subframes": -1}, {"initial_cqi": 16}])
def test_invalid_feedback_config(kwargs):
    with pytest.raises(ConfigurationError):
        FeedbackConfig(**kwargs)


def test_npi_blindness_under_fading(grid):
    channel = FadingChannel(ChannelConfig(seed=9))
    real = channel.realize(0)
    estimates = [
        pilot_sinr_estimate(jammed(grid, Strategy.TIME_DOMAIN_NPI, power), real)
        for power in (0.0, 10.0, 1e4)
    ]
    assert max(estimates) - min(estimates) <= 1e-9


def test_pilot_tone_estimate_decreases_with_power(grid):
    real = FadingChannel(ChannelConfig(seed=9)).realize(0)
    estimates = [
        pilot_sinr_estimate(jammed(grid, Strategy.PILOT_TONES, power), real)
        for power in (0.1, 1.0, 10.0, 100.0)
    ]
    assert all(a > b for a, b in zip(estimates, estimates[1:]))


def test_observe_with_selected_cqi():
    loop = FeedbackLoop(FeedbackConfig(delay_subframes=0))
    report = loop.observe(0, 10.0, cqi=11)
    assert report.cqi == 11 and report.estimated_sinr_db == 10.0
    assert loop.cqi_at(0) == 11
