import math
from unittest.mock import patch

import pytest

from qwalk2d.config import Config, ConfigurationError
from qwalk2d.experiments import (
    PRESETS, ExperimentConfig, ResultTable, TableKind, get_preset, resolve_noise,
    run_experiment, run_preset, run_sweep,
)
from qwalk2d.noise import ChannelSchedule, NoiseKind


def _series(rows, measure):
    return {(step, p): value for step, p, name, value in rows if name == measure}


def test_from_mapping_parses_strings():
    """Test CLI-style strings become typed fields"""
    config = ExperimentConfig.from_mapping({
        'scheme': 'Alternate', 'steps': '4', 'noise': 'bitflip-axis', 'p': '0, 0.5',
        'theta': '0.3', 'measure': 'mid_pp,mid_xy', 'schedule': 'per-axis', 'format': 'csv,svg',
    })
    assert config.scheme == 'alternate'
    assert config.steps == 4
    assert config.p_values == (0.0, 0.5)
    assert config.theta == pytest.approx(0.3)
    assert config.measures == ('mid_pp', 'mid_xy')
    assert config.schedule == 'per_axis'
    assert config.formats == ('csv', 'svg')


def test_defaults():
    """Test an empty mapping gives the noiseless Grover distribution"""
    config = ExperimentConfig.from_mapping({})
    assert config.scheme == 'grover'
    assert config.noise == 'none'
    assert config.theta == pytest.approx(math.pi / 4)
    assert config.is_distribution


@pytest.mark.parametrize("values", [{'steps': 'ten'}, {'p': '0.1,abc'}, {'k': '2.5'}])
def test_malformed_values(values):
    """Test unparseable values raise ConfigurationError"""
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_mapping(values)


@pytest.mark.parametrize("kwargs", [
    {'scheme': 'hexagonal'},
    {'steps': -1},
    {'measures': ()},
    {'measures': ('entanglement',)},
    {'measures': ('distribution', 'mid_pp')},
    {'p_values': (0.1, 0.2)},
    {'formats': ('png',)},
    {'noise': 'bitflip', 'p_values': (0.1,)},
    {'scheme': 'alternate', 'noise': 'bitflip-step', 'p_values': (1.5,)},
    {'scheme': 'alternate', 'noise': 'bitflip-axis', 'p_values': (2.5,)},
    {'noise': 'stateflip', 'k': 4, 'p_values': (0.1,)},
    {'p_values': ()},
])
def test_validate_rejects(kwargs):
    """Test invalid configurations are refused before any work"""
    with pytest.raises(ConfigurationError):
        ExperimentConfig(**kwargs).validate()


def test_density_dimension_cap():
    """Test oversized density runs are refused"""
    config = ExperimentConfig(scheme='grover', steps=10, measures=('mid_pp',))
    with patch.object(Config, 'MAX_DENSITY_DIM', 1000):
        with pytest.raises(ConfigurationError, match="QWALK_MAX_DENSITY_DIM"):
            config.validate()


def test_noiseless_distribution_skips_density():
    """Test noiseless distributions are not limited by the density cap"""
    config = ExperimentConfig(scheme='grover', steps=10)
    assert not config.needs_density()
    with patch.object(Config, 'MAX_DENSITY_DIM', 10):
        config.validate()


def test_two_state_families():
    """Test flip names map onto per-axis and per-step kinds"""
    assert resolve_noise('bitflip-axis', 'pauli', 1.0).kind == NoiseKind.BITFLIP_PER_AXIS
    assert resolve_noise('phaseflip-step', 'alternate', 0.2).kind == NoiseKind.PHASEFLIP_PER_STEP
    assert resolve_noise('bitflip', 'alternate', 0.2).kind == NoiseKind.BITFLIP_PER_STEP
    spec = resolve_noise('phaseflip', 'alternate', 0.2, schedule='per_axis')
    assert spec.kind == NoiseKind.PHASEFLIP_PER_AXIS
    assert spec.schedule == ChannelSchedule.PER_AXIS


def test_state_flip_and_depolarizing():
    """Test scheme-dependent families"""
    assert resolve_noise('stateflip', 'grover', 0.1, k=23).k == 23
    assert resolve_noise('stateflip', 'grover', 0.1).kind == NoiseKind.STATEFLIP4
    assert resolve_noise('stateflip', 'pauli', 0.1).kind == NoiseKind.BITFLIP_PER_STEP
    assert resolve_noise('depolarizing', 'grover', 0.1).kind == NoiseKind.DEPOLARIZING4
    assert resolve_noise('depolarizing', 'alternate', 0.1).kind == NoiseKind.DEPOLARIZING2
    assert resolve_noise('none', 'grover', 0.7).kind == NoiseKind.NONE


@pytest.mark.parametrize("noise,scheme,schedule", [
    ('bitflip-axis', 'grover', None),
    ('phaseflip', 'grover', None),
    ('none', 'grover', 'per_axis'),
    ('depolarizing', 'alternate', 'per_axis'),
    ('bitflip-step', 'alternate', 'per_axis'),
])
def test_invalid_combinations(noise, scheme, schedule):
    """Test impossible pairs name the combination"""
    with pytest.raises(ConfigurationError, match="Invalid combination"):
        resolve_noise(noise, scheme, 0.1, schedule=schedule)


def test_unknown_names():
    """Test unknown noise, scheme and schedule names"""
    with pytest.raises(ConfigurationError):
        resolve_noise('amplitude-damping', 'grover', 0.1)
    with pytest.raises(ConfigurationError):
        resolve_noise('none', 'triangular', 0.1)
    with pytest.raises(ConfigurationError):
        resolve_noise('bitflip', 'pauli', 0.1, schedule='sometimes')


def test_grover_distribution_rows():
    """Test a t=25 distribution covers the whole 51 x 51 lattice"""
    table = run_experiment(ExperimentConfig(scheme='grover', steps=25))
    assert table.kind == TableKind.DISTRIBUTION
    assert len(table.rows) == 51 * 51
    assert table.rows[0][:2] == (-25, -25)
    assert table.rows[1][:2] == (-25, -24)
    assert sum(p for _, _, p in table.rows) == pytest.approx(1.0, abs=1e-12)


def test_noisy_distribution():
    """Test the density path gives a normalised distribution"""
    table = run_experiment(ExperimentConfig(scheme='alternate', steps=4, noise='bitflip-axis', p_values=(0.6,)))
    assert len(table.rows) == 81
    assert sum(p for _, _, p in table.rows) == pytest.approx(1.0, abs=1e-12)


def test_series_rows():
    """Test one row per step and measure"""
    table = run_experiment(ExperimentConfig(
        scheme='pauli', steps=3, noise='bitflip-step', p_values=(0.2,), measures=('mid_xy', 'purity'),
    ))
    assert table.kind == TableKind.SERIES
    assert [(row[0], row[2]) for row in table.rows] == [
        (step, measure) for step in range(4) for measure in ('mid_xy', 'purity')
    ]
    assert all(row[1] == 0.2 for row in table.rows)
    purity = _series(table.rows, 'purity')
    assert purity[(0, 0.2)] == pytest.approx(1.0, abs=1e-12)


def test_robustness_undefined_at_start():
    """Test R is empty while the noiseless correlation is zero"""
    table = run_experiment(ExperimentConfig(
        scheme='alternate', steps=3, noise='depolarizing', p_values=(0.2,), measures=('robustness',),
    ))
    robustness = _series(table.rows, 'robustness')
    assert robustness[(0, 0.2)] is None
    assert robustness[(3, 0.2)] >= 0.0


def test_robustness_without_noise():
    """Test R is 1 wherever it is defined when p=0"""
    table = run_experiment(ExperimentConfig(
        scheme='pauli', steps=4, noise='bitflip', p_values=(0.0,), measures=('robustness',),
    ))
    values = [value for _, _, _, value in table.rows if value is not None]
    assert values
    assert all(value == pytest.approx(1.0, abs=1e-8) for value in values)


def test_single_point():
    """Test a one-value sweep equals the plain run"""
    config = ExperimentConfig(scheme='alternate', steps=3, noise='bitflip', p_values=(0.0,), measures=('mid_pp',))
    assert run_sweep(config).rows == run_experiment(config).rows


def test_ordering_and_duplicates():
    """Test rows come out in (p, step) order, duplicates included"""
    config = ExperimentConfig(
        scheme='alternate', steps=2, noise='bitflip', p_values=(0.3, 0.0, 0.3), measures=('mid_pp',),
    )
    rows = run_experiment(config).rows
    assert [(row[1], row[0]) for row in rows] == [(p, s) for p in (0.3, 0.0, 0.3) for s in range(3)]
    assert [row[3] for row in rows[:3]] == [row[3] for row in rows[6:]]


@pytest.mark.parametrize("scheme,noise,k", [
    ('grover', 'stateflip', 3),
    ('grover', 'stateflip', 23),
    ('grover', 'depolarizing', 3),
    ('alternate', 'bitflip-step', 3),
    ('alternate', 'bitflip-axis', 3),
    ('alternate', 'depolarizing', 3),
    ('pauli', 'bitflip-step', 3),
    ('pauli', 'bitflip-axis', 3),
    ('pauli', 'depolarizing', 3),
])
def test_noise_reduces_particle_position_correlations(scheme, noise, k):
    """Test stronger noise leaves no more particle-position correlation at t=8"""
    config = ExperimentConfig(
        scheme=scheme, steps=8, noise=noise, k=k, p_values=(0.0, 0.1, 0.3), measures=('mid_pp',),
    )
    q = _series(run_sweep(config).rows, 'mid_pp')
    assert q[(8, 0.0)] >= q[(8, 0.1)] - 1e-9
    assert q[(8, 0.1)] >= q[(8, 0.3)] - 1e-9


def test_workers_match_serial():
    """Test a process pool gives the same rows as a serial sweep"""
    config = ExperimentConfig(
        scheme='pauli', steps=2, noise='phaseflip-axis', p_values=(0.0, 0.5, 1.0), measures=('mid_xy',),
    )
    serial = run_sweep(config).rows
    with patch.object(Config, 'SWEEP_WORKERS', 2):
        parallel = run_sweep(config).rows
    assert parallel == serial


def test_all_figures_registered():
    """Test presets fig1 to fig16 exist with runnable configurations"""
    assert list(PRESETS) == [f"fig{i}" for i in range(1, 17)]
    for preset in PRESETS.values():
        assert preset.runs
        assert preset.steps <= preset.full_steps
        for config in preset.runs:
            config.validate()


def test_get_preset():
    """Test lookup is case-insensitive and unknown names fail"""
    assert get_preset('FIG7').name == 'fig7'
    with pytest.raises(ConfigurationError):
        get_preset('fig17')


def test_fig1_tables():
    """Test fig1 emits one normalised distribution per scheme"""
    tables = dict(run_preset('fig1'))
    assert set(tables) == {'fig1_grover', 'fig1_alternate', 'fig1_pauli'}
    for table in tables.values():
        assert len(table.rows) == 51 * 51
        assert sum(p for _, _, p in table.rows) == pytest.approx(1.0, abs=1e-10)


def test_fig10_flip_set_ordering():
    """Test cyclic flips hurt x-y correlations more than the full flip set"""
    (name, table), = run_preset('fig10')
    assert name == 'fig10'
    final = {measure: value for step, _, measure, value in table.rows if step == 6}
    assert set(final) == {'mid_xy[k3]', 'mid_xy[k6]', 'mid_xy[k23]'}
    assert final['mid_xy[k3]'] < final['mid_xy[k23]']


@pytest.mark.parametrize("name", ['fig15', 'fig16'])
def test_two_state_walks_keep_more_xy_correlation(name):
    """Test R(alternate) and R(pauli) exceed R(grover) at p=0.2 for steps 3 to 8"""
    (_, table), = run_preset(name)
    robustness = {(step, measure): value for step, _, measure, value in table.rows}
    for step in range(3, 9):
        grover = robustness[(step, 'robustness[grover]')]
        assert grover is not None
        assert robustness[(step, 'robustness[alternate]')] > grover
        assert robustness[(step, 'robustness[pauli]')] > grover


def test_result_table_merge():
    """Test distribution and series tables do not mix"""
    series = ResultTable(TableKind.SERIES, [(0, 0.0, 'mid_pp', 0.0)])
    series.extend(ResultTable(TableKind.SERIES, [(1, 0.0, 'mid_pp', 0.5)]))
    assert len(series.rows) == 2
    assert series.header == ('step', 'p', 'measure', 'value')
    with pytest.raises(ConfigurationError):
        series.extend(ResultTable(TableKind.DISTRIBUTION, [(0, 0, 1.0)]))
