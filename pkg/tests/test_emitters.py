import csv
import os

import pytest

from qwalk2d.config import ConfigurationError
from qwalk2d.emitters import _gray, default_plot_kind, emit_csv, emit_svg, emit_table
from qwalk2d.experiments import ExperimentConfig, ResultTable, TableKind, run_experiment, run_preset


@pytest.fixture
def series_table():
    rows = [(step, p, 'mid_xy', step * 0.1 if step else None) for p in (0.0, 0.5) for step in range(4)]
    return ResultTable(TableKind.SERIES, rows, 'demo')


def test_origin_distribution_csv(tmp_path):
    """Test the t=0 table is a single certain cell"""
    path = emit_csv(run_experiment(ExperimentConfig(scheme='grover', steps=0)), str(tmp_path / 'origin.csv'))
    with open(path, encoding='utf-8') as handle:
        assert handle.read() == "x,y,p\n0,0,1.000000000000\n"


def test_series_csv(tmp_path, series_table):
    """Test short-form p values and empty cells for undefined values"""
    path = emit_csv(series_table, str(tmp_path / 'series.csv'))
    with open(path, encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    assert lines[0] == "step,p,measure,value"
    assert lines[1] == "0,0,mid_xy,"
    assert lines[2] == "1,0,mid_xy,0.100000000000"
    assert lines[5] == "0,0.5,mid_xy,"


def test_fig1_csv_is_deterministic(tmp_path):
    """Test two independent fig1 runs write 51² rows summing to one, byte-identically"""
    paths = []
    for run in ('a', 'b'):
        for name, table in run_preset('fig1'):
            paths.append(emit_csv(table, str(tmp_path / run / f"{name}.csv")))
    first, second = paths[:3], paths[3:]

    with open(first[1], encoding='utf-8') as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 2601
    assert sum(float(row['p']) for row in rows) == pytest.approx(1.0, abs=1e-8)
    for path_a, path_b in zip(first, second):
        with open(path_a, 'rb') as a, open(path_b, 'rb') as b:
            assert a.read() == b.read()


def test_small_values_keep_significant_digits(tmp_path):
    """Test values below 0.1 switch to scientific notation"""
    rows = [(0, 0, 0.25), (0, 1, 0.1), (1, 0, 1.5e-7), (1, 1, -0.003), (2, 2, 0.0)]
    path = emit_csv(ResultTable(TableKind.DISTRIBUTION, rows), str(tmp_path / 'small.csv'))
    with open(path, encoding='utf-8') as handle:
        values = [line.split(',')[2] for line in handle.read().splitlines()[1:]]
    assert values == [
        '0.250000000000', '0.100000000000', '1.50000000000e-07', '-3.00000000000e-03', '0.000000000000',
    ]


def test_unwritable_path(tmp_path):
    """Test output errors surface as configuration errors"""
    blocker = tmp_path / 'file'
    blocker.write_text('x')
    table = ResultTable(TableKind.DISTRIBUTION, [(0, 0, 1.0)])
    with pytest.raises(ConfigurationError):
        emit_csv(table, str(blocker / 'nested' / 'out.csv'))


def test_gray_scale():
    """Test the heatmap colour ramp"""
    assert _gray(0.0, 1.0) == "rgb(255,255,255)"
    assert _gray(1.0, 1.0) == "rgb(0,0,0)"
    assert _gray(0.0, 0.0) == "rgb(255,255,255)"


def test_single_cell_heatmap(tmp_path):
    """Test a certain origin renders as one black cell"""
    table = ResultTable(TableKind.DISTRIBUTION, [(0, 0, 1.0)], 'origin')
    path = emit_svg(table, 'heatmap', str(tmp_path / 'origin.svg'))
    with open(path, encoding='utf-8') as handle:
        content = handle.read()
    assert content.startswith('<?xml')
    assert content.rstrip().endswith('</svg>')
    assert content.count('data-x=') == 1
    assert 'fill="rgb(0,0,0)" data-x="0" data-y="0"' in content


def test_heatmap_cells(tmp_path):
    """Test every lattice site gets a cell"""
    table = run_experiment(ExperimentConfig(scheme='grover', steps=2))
    path = emit_svg(table, 'heatmap', str(tmp_path / 'grover.svg'))
    with open(path, encoding='utf-8') as handle:
        assert handle.read().count('data-x=') == 25


def test_coincident_lines(tmp_path):
    """Test identical series still get separate polylines and legend entries"""
    rows = [(step, p, 'mid_pp', 0.5) for p in (0.1, 0.2) for step in range(3)]
    path = emit_svg(ResultTable(TableKind.SERIES, rows), 'lines', str(tmp_path / 'flat.svg'))
    with open(path, encoding='utf-8') as handle:
        content = handle.read()
    assert content.count('<polyline') == 2
    assert 'mid_pp p=0.1' in content and 'mid_pp p=0.2' in content


def test_lines_skip_undefined_values(tmp_path, series_table):
    """Test None values break the polyline instead of plotting zero"""
    path = emit_svg(series_table, 'lines', str(tmp_path / 'series.svg'))
    with open(path, encoding='utf-8') as handle:
        content = handle.read()
    assert content.count('<polyline') == 2
    assert content.count('class="series"') == 2


def test_plot_kind_mismatch(tmp_path, series_table):
    """Test heatmaps need distributions and line plots need series"""
    distribution = ResultTable(TableKind.DISTRIBUTION, [(0, 0, 1.0)])
    with pytest.raises(ConfigurationError):
        emit_svg(series_table, 'heatmap', str(tmp_path / 'bad.svg'))
    with pytest.raises(ConfigurationError):
        emit_svg(distribution, 'lines', str(tmp_path / 'bad.svg'))
    with pytest.raises(ConfigurationError):
        emit_svg(distribution, 'contour', str(tmp_path / 'bad.svg'))


def test_emit_table(tmp_path, series_table):
    """Test one file per format with the extension appended"""
    written = emit_table(series_table, str(tmp_path / 'out' / 'demo'), ('csv', 'svg'))
    assert [os.path.basename(path) for path in written] == ['demo.csv', 'demo.svg']
    assert all(os.path.exists(path) for path in written)
    assert default_plot_kind(series_table) == 'lines'
    with pytest.raises(ConfigurationError):
        emit_table(series_table, str(tmp_path / 'demo'), ('pdf',))
