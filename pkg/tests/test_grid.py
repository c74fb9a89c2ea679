import numpy as np
import pytest
from hypothesis import given, strategies as st

from linksim.core.errors import ConfigurationError
from linksim.core.grid import (
    GridConfig,
    build_grid,
    control_res,
    data_res,
    grid_layout_rows,
    mask_from_res,
    pilot_res,
)
from shared.models import ReKind, ResourceElement


def test_default_grid_counts(grid):
    assert grid.config.total_re_count == 8400
    assert grid.shape == (600, 14)
    assert len(pilot_res(grid)) == 400
    assert len(data_res(grid)) == 8000
    assert len(control_res(grid)) == 0


def test_fresh_grid_powers():
    grid = build_grid(GridConfig())
    assert np.all(grid.signal_power == 1.0)
    assert np.all(grid.interference_power == 0.0)
    assert grid.noise_power == 1.0


def test_pilot_spacing_within_symbol(grid):
    for symbol in grid.config.pilot_symbol_indices:
        subcarriers = np.flatnonzero(grid.pilot_mask[:, symbol])
        assert set(np.diff(subcarriers)) == {6}


def test_pilot_predicate():
    config = GridConfig()
    assert config.classify(6, 0) is ReKind.PILOT
    assert config.classify(3, 4) is ReKind.PILOT
    assert config.classify(3, 0) is ReKind.DATA
    assert config.classify(6, 1) is ReKind.DATA


def test_pilot_sparsity(grid):
    assert len(pilot_res(grid)) / grid.config.total_re_count < 1 / grid.config.pilot_subcarrier_period


def test_pilot_subcarriers(grid):
    # shifts 0 and 3 with period 6 put pilots on every third subcarrier
    np.testing.assert_array_equal(grid.pilot_subcarriers, np.arange(0, 600, 3))


def test_control_region_excludes_data():
    grid = build_grid(GridConfig(control_symbol_count=2))
    assert not grid.data_mask[:, :2].any()
    # pilots in symbol 0 keep their label
    assert grid.pilot_mask[:, 0].sum() == 100
    assert len(control_res(grid)) == 2 * 600 - 100


@pytest.mark.parametrize(
    "kwargs",
    [
        {"num_rb": 0},
        {"pilot_subcarrier_shifts": (0, 6, 0, 3)},
        {"pilot_symbol_indices": (0, 4, 7, 14)},
        {"pilot_symbol_indices": (0, 4, 7)},
        {"control_symbol_count": 15},
    ],
)
def test_invalid_config_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        GridConfig(**kwargs)


def test_error_names_field():
    with pytest.raises(ConfigurationError, match="grid.num_rb"):
        GridConfig(num_rb=0)


def test_equal_configs_build_identical_grids():
    a = build_grid(GridConfig(), noise_power=1e-3)
    b = build_grid(GridConfig(), noise_power=1e-3)
    assert a.identical_to(b)


def test_grid_is_read_only(grid):
    with pytest.raises(ValueError):
        grid.interference_power[0, 0] = 1.0


def test_negative_power_rejected(grid):
    with pytest.raises(ConfigurationError):
        grid.with_interference(-np.ones(grid.shape))


def test_mask_round_trip(grid):
    np.testing.assert_array_equal(mask_from_res(grid, pilot_res(grid)), grid.pilot_mask)


def test_layout_rows_match_grid(grid):
    rows = grid_layout_rows(grid)
    assert len(rows) == 8400
    assert rows[0] == {"subcarrier": 0, "symbol": 0, "kind": "pilot"}
    assert sum(r["kind"] == "pilot" for r in rows) == 400


def test_resource_element_labels(grid):
    assert grid.resource_element(6, 0) == ResourceElement(6, 0, ReKind.PILOT)
    assert grid.resource_element(3, 4).kind is ReKind.PILOT
    assert grid.resource_element(1, 0).kind is ReKind.DATA


@given(
    num_rb=st.integers(1, 6),
    symbols=st.integers(4, 14),
    period=st.integers(1, 8),
    control=st.integers(0, 3),
    data=st.data(),
)
def test_kinds_partition_grid(num_rb, symbols, period, control, data):
    pilot_symbols = data.draw(st.lists(st.integers(0, symbols - 1), min_size=1, max_size=4, unique=True))
    shifts = data.draw(st.lists(st.integers(0, period - 1), min_size=len(pilot_symbols), max_size=len(pilot_symbols)))
    config = GridConfig(
        num_rb=num_rb,
        symbols_per_subframe=symbols,
        pilot_symbol_indices=tuple(pilot_symbols),
        pilot_subcarrier_period=period,
        pilot_subcarrier_shifts=tuple(shifts),
        control_symbol_count=control,
    )
    grid = build_grid(config)

    pilots, data_set, controls = pilot_res(grid), data_res(grid), control_res(grid)
    assert not (pilots & data_set) and not (pilots & controls) and not (data_set & controls)
    assert len(pilots) + len(data_set) + len(controls) == config.total_re_count

    for subcarrier, symbol in pilots:
        assert config.is_pilot(subcarrier, symbol)
    for subcarrier, symbol in data_set:
        assert config.classify(subcarrier, symbol) is ReKind.DATA
