"""
End-to-end closed-loop scenarios on the cabled (AWGN) channel at 30 dB SNR,
10^4 subframes per point.
"""

import pytest

from linksim.core.grid import GridConfig, build_grid
from linksim.core.harq import analytic_latency
from linksim.core.interference import InterferenceProfile, Strategy, equal_density_power
from linksim.core.scenario import parse_config
from linksim.core.sim import run_point, run_sweep

pytestmark = pytest.mark.slow

SUBFRAMES = 10_000
POINTS = [-5.0, 0.0, 5.0, 10.0]


def cabled(strategies=("none",), points=(0.0,)):
    return parse_config(overrides={
        "channel": {"channel_profile": "awgn", "snr_db": 30.0},
        "sweep": {"subframes_per_point": SUBFRAMES, "strategies": list(strategies), "sweep_sinr_db": list(points)},
    })


@pytest.fixture(scope="module")
def sweep():
    points = run_sweep(cabled(("npi_fd", "pi", "barrage"), POINTS))
    return {(p.strategy, p.target_sinr_db): p for p in points}


def test_latency_anchor():
    assert analytic_latency(0.10, 8.0) == pytest.approx(0.8889, abs=1e-4)
    assert analytic_latency(0.10, 8.0) <= 0.89


def test_interference_free_baseline():
    metrics = run_point(cabled())
    assert metrics.bler_ci_high <= 0.10
    assert metrics.throughput_bps / metrics.throughput_ceiling_bps >= 0.9


@pytest.mark.parametrize("target", [-5.0, 0.0, 5.0])
def test_npi_breaks_link_adaptation(sweep, target):
    assert sweep[("npi_fd", target)].bler > 0.5


@pytest.mark.parametrize("strategy", ["pi", "barrage"])
def test_pilot_and_barrage_interference_stay_adapted(sweep, strategy):
    assert sweep[(strategy, 0.0)].bler < 0.25


def test_npi_estimate_plateaus(sweep):
    estimates = [sweep[("npi_fd", t)].median_estimated_sinr_db for t in POINTS]
    actual = [sweep[("npi_fd", t)].actual_sinr_db for t in POINTS]
    assert max(actual) - min(actual) >= 15.0 - 0.1
    assert max(estimates) - min(estimates) <= 2.11


def test_pilot_tone_estimate_tracks_power(sweep):
    estimates = [sweep[("pi", t)].median_estimated_sinr_db for t in POINTS]
    assert all(a < b for a, b in zip(estimates, estimates[1:]))


def test_npi_gap_exceeds_pilot_tone_gap(sweep):
    for target in POINTS:
        assert sweep[("npi_fd", target)].sinr_gap_db - sweep[("pi", target)].sinr_gap_db >= 2.0


def test_npi_inflates_latency(sweep):
    npi, pi = sweep[("npi_fd", 5.0)], sweep[("pi", 5.0)]
    assert npi.mean_retx_latency_ms >= 10.0
    assert npi.mean_retx_latency_ms >= 10.0 * pi.mean_retx_latency_ms


def test_barrage_needs_three_times_the_power():
    grid = build_grid(GridConfig())
    barrage = equal_density_power(grid, InterferenceProfile(Strategy.BARRAGE), 1.0)
    for strategy in (Strategy.PILOT_TONES, Strategy.FREQ_DOMAIN_NPI):
        assert barrage == pytest.approx(3.0 * equal_density_power(grid, InterferenceProfile(strategy), 1.0), rel=0.01)
