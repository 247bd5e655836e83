import os
from unittest.mock import patch

import pytest
from numpy.linalg import LinAlgError

from main import EXIT_CONFIGURATION, EXIT_INVARIANT, EXIT_OK, main
from qwalk2d.hilbert import InvalidStateError
from qwalk2d.symmetry import SymmetryReport


def test_single_run_writes_csv(tmp_path):
    """Test a noiseless distribution run"""
    out = tmp_path / 'grover'
    assert main(['--scheme', 'grover', '--steps', '2', '--out', str(out)]) == EXIT_OK
    with open(f"{out}.csv", encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    assert lines[0] == 'x,y,p'
    assert len(lines) == 1 + 25


def test_out_extension_is_stripped(tmp_path):
    """Test --out accepts a path with its extension"""
    out = tmp_path / 'series.csv'
    code = main(['--scheme', 'pauli', '--steps', '2', '--noise', 'bitflip-axis', '--p', '0.5',
                 '--measure', 'mid_xy,purity', '--format', 'csv,svg', '--out', str(out)])
    assert code == EXIT_OK
    assert os.path.exists(tmp_path / 'series.csv')
    assert os.path.exists(tmp_path / 'series.svg')


@pytest.mark.parametrize("argv", [
    ['--scheme', 'hexagonal', '--steps', '2'],
    ['--scheme', 'grover', '--steps', '2', '--noise', 'bitflip-axis', '--p', '0.1'],
    ['--scheme', 'alternate', '--steps', '2', '--noise', 'bitflip-step', '--p', '1.5'],
    ['--scheme', 'grover', '--steps', '-3'],
    ['--preset', 'fig99'],
    ['--config', 'does-not-exist.env'],
])
def test_configuration_errors_exit_2(argv, tmp_path):
    """Test bad input exits with the configuration code"""
    assert main(argv + ['--out', str(tmp_path / 'x')]) == EXIT_CONFIGURATION


def test_config_file_with_flag_override(tmp_path):
    """Test flags take precedence over the config file"""
    config = tmp_path / 'run.env'
    config.write_text("scheme=grover\nsteps=5\nnoise=none\n")
    out = tmp_path / 'override'
    assert main(['--config', str(config), '--steps', '1', '--out', str(out)]) == EXIT_OK
    with open(f"{out}.csv", encoding='utf-8') as handle:
        assert len(handle.read().splitlines()) == 1 + 9


def test_preset_writes_tables(tmp_path):
    """Test fig1 writes one table per walk into the output directory"""
    assert main(['--preset', 'fig1', '--out', str(tmp_path)]) == EXIT_OK
    assert sorted(os.listdir(tmp_path)) == ['fig1_alternate.csv', 'fig1_grover.csv', 'fig1_pauli.csv']


def test_list_presets(capsys):
    """Test preset listing"""
    assert main(['--list-presets']) == EXIT_OK
    output = capsys.readouterr().out
    assert output.count('\n') == 16
    assert 'fig16' in output


def test_verify_absorption(capsys):
    """Test the absorption suite passes"""
    assert main(['--verify', 'absorption']) == EXIT_OK
    assert capsys.readouterr().out.startswith('[PASS]')


def test_failed_verification_exits_1():
    """Test a failing report gives the invariant exit code"""
    failing = [SymmetryReport('broken', False, {'distribution': 0.5})]
    with patch('qwalk2d.symmetry.run_verifications', return_value=failing):
        assert main(['--verify', 'symmetry']) == EXIT_INVARIANT


def test_invalid_state_exits_1(tmp_path):
    """Test numerical invariant failures are reported separately from bad input"""
    with patch('qwalk2d.experiments.run_experiment', side_effect=InvalidStateError("negative eigenvalue")):
        assert main(['--scheme', 'grover', '--steps', '1', '--out', str(tmp_path / 'x')]) == EXIT_INVARIANT


def test_linear_algebra_failure_exits_1(tmp_path):
    """Test a failed eigendecomposition is an invariant failure, not bad input"""
    error = LinAlgError("Eigenvalues did not converge")
    with patch('qwalk2d.experiments.run_experiment', side_effect=error):
        assert main(['--scheme', 'grover', '--steps', '1', '--out', str(tmp_path / 'x')]) == EXIT_INVARIANT
