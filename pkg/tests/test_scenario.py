import json

import pytest
from hypothesis import given, strategies as st

from linksim.core.channel import ChannelProfile
from linksim.core.errors import ConfigurationError
from linksim.core.harq import HarqMode
from linksim.core.interference import Strategy
from linksim.core.scenario import DEFAULTS_PATH, ScenarioConfig, parse_config, parse_override, serialize


def test_empty_config_gives_defaults(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("")
    config = parse_config(path)

    assert config == ScenarioConfig()
    assert config.grid.num_rb == 50
    assert config.csi.period_subframes == 10
    assert config.harq.max_retx == 4
    assert config.harq.tau_wait_ms == 8.0
    assert config.channel.profile is ChannelProfile.AWGN
    assert not config.linkadapt.outer_loop.enabled
    assert config.subframes_per_point == 100_000


def test_file_values_merge_over_defaults(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"channel": {"snr_db": 25.0}, "sweep": {"strategies": ["npi_fd"]}}))
    config = parse_config(path)
    assert config.channel.snr_db == 25.0
    assert config.channel.doppler_hz == 20.0
    assert config.strategies == (Strategy.FREQ_DOMAIN_NPI,)


def test_overrides_apply_after_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"harq": {"max_retx": 2}}))
    config = parse_config(path, ["harq.max_retx=0", "harq.harq_mode=unbounded", "channel.channel_profile=awgn"])
    assert config.harq.max_retx == 0
    assert config.harq.mode is HarqMode.UNBOUNDED
    assert config.channel.profile is ChannelProfile.AWGN


def test_override_values_parse_as_json():
    assert parse_override("sweep.sweep_sinr_db=[-5, 0, 5]") == {"sweep": {"sweep_sinr_db": [-5, 0, 5]}}
    assert parse_override("interference.strategy=barrage") == {"interference": {"strategy": "barrage"}}


def test_power_in_dbm():
    config = parse_config(overrides=["interference.total_power_dbm=10"])
    assert config.interference.total_power == pytest.approx(10.0)


def test_both_power_units_rejected():
    with pytest.raises(ConfigurationError):
        parse_config(overrides={"interference": {"total_power_dbm": 0, "total_power_mw": 1.0}})


@pytest.mark.parametrize("override, key", [("harq.max_retries=3", "harq.max_retries"), ("radio.snr_db=3", "radio")])
def test_unknown_key_named(override, key):
    with pytest.raises(ConfigurationError, match=key):
        parse_config(overrides=[override])


@pytest.mark.parametrize("override", ["harq=3", "max_retx=3", "harq.max_retx"])
def test_malformed_override(override):
    with pytest.raises(ConfigurationError):
        parse_config(overrides=[override])


@pytest.mark.parametrize(
    "override",
    ["harq.tau_wait_ms=0", "csi.csi_period_sf=0", "sweep.sweep_sinr_db=[]", "grid.num_rb=\"many\""],
)
def test_invalid_values_rejected(override):
    with pytest.raises(ConfigurationError):
        parse_config(overrides=[override])


def test_invalid_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigurationError):
        parse_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        parse_config(tmp_path / "absent.json")


def test_round_trip_through_file(tmp_path):
    config = parse_config(overrides=[
        "interference.strategy=npi_td",
        "interference.total_power_dbm=13.7",
        "channel.channel_profile=flat",
        "sweep.master_seed=987654321",
        "linkadapt.olla_enabled=true",
        "linkadapt.olla_step_up_db=0.5",
    ])
    path = tmp_path / "round.json"
    path.write_text(json.dumps(serialize(config)))
    assert parse_config(path) == config


@given(
    snr=st.floats(0, 40),
    power=st.floats(0, 1e6),
    strategy=st.sampled_from([s.value for s in Strategy]),
    max_retx=st.integers(0, 8),
    period=st.integers(1, 40),
    seed=st.integers(0, 2 ** 64 - 1),
    points=st.lists(st.floats(-20, 20), min_size=1, max_size=5),
)
def test_round_trip(snr, power, strategy, max_retx, period, seed, points):
    config = parse_config(overrides={
        "channel": {"snr_db": snr},
        "interference": {"strategy": strategy, "total_power_mw": power},
        "harq": {"max_retx": max_retx},
        "csi": {"csi_period_sf": period},
        "sweep": {"master_seed": seed, "sweep_sinr_db": points},
    })
    assert parse_config(overrides=json.loads(json.dumps(serialize(config)))) == config


def test_shipped_epa_olla_scenario():
    config = parse_config(DEFAULTS_PATH.parent / "scenarios" / "epa_olla.json")
    assert config.channel.profile is ChannelProfile.TAPPED_DELAY_LINE
    assert config.linkadapt.outer_loop.enabled
    assert config.linkadapt.outer_loop.target_bler == pytest.approx(0.1)
    assert config.linkadapt.outer_loop.step_down_db == pytest.approx(1 / 9)


@pytest.mark.parametrize(
    "override, key",
    [
        ("linkadapt.olla_target_bler=1.5", "olla_target_bler"),
        ("linkadapt.olla_step_up_db=0", "olla_step_up_db"),
        ("linkadapt.olla_offset_max_db=-1", "olla_offset"),
        ("linkadapt.olla_enabled=\"yes\"", "olla_enabled"),
    ],
)
def test_outer_loop_keys_validated(override, key):
    with pytest.raises(ConfigurationError, match=key):
        parse_config(overrides=[override])
