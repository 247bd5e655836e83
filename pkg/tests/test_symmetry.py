import numpy as np
import pytest

from qwalk2d.schemes import HADAMARD, CoinOperator, WalkScheme, grover_coin
from qwalk2d.symmetry import (
    EQUIVALENCE_TOLERANCE, SymmetryReport, absorb_bitflip, absorb_phaseflip, absorbed_coin,
    run_verifications, single_flip_absorption_check, verify_grover_breakdown, verify_twostate_symmetry,
)


def test_absorbed_hadamard_coins():
    """Test σ₁H and σ₃H give the H′ and H″ coins"""
    hadamard = CoinOperator(HADAMARD)
    assert np.allclose(absorb_bitflip(hadamard).matrix, np.array([[1, -1], [1, 1]]) / np.sqrt(2))
    assert np.allclose(absorb_phaseflip(hadamard).matrix, np.array([[1, 1], [-1, 1]]) / np.sqrt(2))


def test_absorbed_coin_record():
    """Test absorbed_coin keeps the base coin and flip name"""
    hadamard = CoinOperator(HADAMARD)
    absorbed = absorbed_coin(hadamard, 'phaseflip')
    assert absorbed.base is hadamard
    assert absorbed.flip == 'phaseflip'
    assert np.allclose(absorbed.result.matrix, absorb_phaseflip(hadamard).matrix)
    with pytest.raises(ValueError):
        absorbed_coin(hadamard, 'spinflip')


def test_absorption_needs_two_state_coin():
    """Test the Grover coin cannot absorb a Pauli flip"""
    with pytest.raises(ValueError):
        absorb_bitflip(grover_coin())


@pytest.mark.parametrize("scheme", [WalkScheme.alternate(), WalkScheme.pauli()], ids=['alternate', 'pauli'])
def test_twostate_symmetry_holds(scheme):
    """Test deterministic flips leave two-state distributions unchanged"""
    report = verify_twostate_symmetry(scheme, 10)
    assert report.passed, report.summary()
    assert set(report.deviations) == {
        'bitflip_per_step', 'bitflip_per_axis', 'bitflip_absorbed',
        'phaseflip_per_step', 'phaseflip_per_axis', 'phaseflip_absorbed',
    }
    assert max(report.deviations.values()) <= EQUIVALENCE_TOLERANCE


def test_twostate_symmetry_argument_checks():
    """Test Grover walks and negative t are rejected"""
    with pytest.raises(ValueError):
        verify_twostate_symmetry(WalkScheme.grover(), 3)
    with pytest.raises(ValueError):
        verify_twostate_symmetry(WalkScheme.pauli(), -1)


def test_twostate_symmetry_at_start():
    """Test t=0 passes trivially"""
    assert verify_twostate_symmetry(WalkScheme.alternate(), 0).passed


@pytest.mark.parametrize("k", [3, 23])
def test_grover_breakdown(k):
    """Test state flips at p=1 move the Grover distribution and mix the state"""
    report = verify_grover_breakdown(k, 5)
    assert report.passed, report.summary()
    assert report.deviations['distribution'] > 0.01
    assert report.details['purity'] < 1 - 1e-6


def test_grover_breakdown_without_noise():
    """Test p=0 reproduces the noiseless walk, so no breakdown is reported"""
    report = verify_grover_breakdown(3, 3, p=0.0)
    assert report.deviations['distribution'] <= EQUIVALENCE_TOLERANCE
    assert report.details['purity'] == pytest.approx(1.0, abs=1e-10)
    assert not report.passed


def test_single_flip_absorption():
    """Test a single cyclic flip absorbs into the Grover coin"""
    report = single_flip_absorption_check(t=4)
    assert report.passed, report.summary()


@pytest.mark.parametrize("t", [0, 3])
def test_single_identity_flip(t):
    """Test the identity flip is trivially absorbed"""
    report = single_flip_absorption_check(np.eye(4), t=t)
    assert report.deviations['distribution'] <= EQUIVALENCE_TOLERANCE
    assert report.passed


def test_single_transposition_absorption():
    """Test a coin transposition absorbs too"""
    swap = np.eye(4)[[1, 0, 2, 3]]
    assert single_flip_absorption_check(swap, t=3).passed


def test_report_summary():
    """Test the one-line summary format"""
    report = SymmetryReport('demo', False, {'distribution': 0.5}, {'purity': 0.25})
    assert report.summary() == "[FAIL] demo: distribution=5.000e-01, purity=2.500e-01"


def test_run_verifications():
    """Test the absorption suite and unknown suite names"""
    reports = run_verifications('absorption')
    assert len(reports) == 1 and reports[0].passed
    with pytest.raises(ValueError):
        run_verifications('everything')
