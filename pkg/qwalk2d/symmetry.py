"""
Flip symmetries of the walks.

A deterministic bit or phase flip after every step of a two-state walk can be
folded into the evolution, so p=1 noise reproduces the noiseless distribution.
For the alternate walk the flip is absorbed into the coin (H′ = σ₁H,
H″ = σ₃H). The Pauli walk has no coin, so its flip is folded into the
y-shift instead. The four-state Grover walk has no such symmetry for the
averaged state-flip channels, though a single flip still absorbs into G.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from qwalk2d.hilbert import Distribution, marginal_distribution, purity, to_density
from qwalk2d.noise import (
    CYCLIC_FLIP, ChannelSchedule, NoiseKind, NoiseSpec, evolve_density,
    noisy_step_with_channel, single_flip_channel,
)
from qwalk2d.schemes import (
    SIGMA_1, SIGMA_3, CoinOperator, InitialCoinState, SchemeKind, WalkScheme,
    apply_coin, apply_moves, axis_moves, default_coin_state, evolve_pure, initial_state,
)

logger = logging.getLogger(__name__)

EQUIVALENCE_TOLERANCE = 1e-10
BREAKDOWN_THRESHOLD = 0.01
PURITY_MARGIN = 1e-6

FLIPS = {
    'bitflip': (SIGMA_1, NoiseKind.BITFLIP_PER_STEP, NoiseKind.BITFLIP_PER_AXIS),
    'phaseflip': (SIGMA_3, NoiseKind.PHASEFLIP_PER_STEP, NoiseKind.PHASEFLIP_PER_AXIS),
}


@dataclass(frozen=True, eq=False)
class AbsorbedCoin:
    base: CoinOperator
    flip: str
    result: CoinOperator


@dataclass(frozen=True)
class SymmetryReport:
    name: str
    passed: bool
    deviations: Dict[str, float] = field(default_factory=dict)
    details: Dict[str, float] = field(default_factory=dict)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{key}={value:.3e}" for key, value in {**self.deviations, **self.details}.items()]
        return f"[{status}] {self.name}: " + ", ".join(parts)


def _absorb(coin: CoinOperator, flip: np.ndarray) -> CoinOperator:
    if coin.dim != 2:
        raise ValueError(f"flip absorption needs a 2x2 coin, got {coin.dim}x{coin.dim}")
    return CoinOperator(flip @ coin.matrix)


def absorb_bitflip(coin: CoinOperator) -> CoinOperator:
    """σ₁·coin; the Hadamard-form coin becomes H′ = (1/√2)[[1, −1], [1, 1]]"""
    return _absorb(coin, SIGMA_1)


def absorb_phaseflip(coin: CoinOperator) -> CoinOperator:
    """σ₃·coin; the Hadamard-form coin becomes H″ = (1/√2)[[1, 1], [−1, 1]]"""
    return _absorb(coin, SIGMA_3)


def absorbed_coin(coin: CoinOperator, flip: str) -> AbsorbedCoin:
    absorb = {'bitflip': absorb_bitflip, 'phaseflip': absorb_phaseflip}.get(flip)
    if absorb is None:
        raise ValueError(f"unknown flip '{flip}'")
    return AbsorbedCoin(coin, flip, absorb(coin))


def _deviation(a: Distribution, b: Distribution) -> float:
    return float(np.max(np.abs(a.probabilities - b.probabilities)))


def _noiseless_distribution(scheme: WalkScheme, t: int,
                            coin: Optional[InitialCoinState] = None) -> Distribution:
    state = initial_state(scheme, coin, steps=t)
    return marginal_distribution(evolve_pure(scheme, state, t))


def _noisy_distribution(scheme: WalkScheme, t: int, noise: NoiseSpec) -> Distribution:
    rho = to_density(initial_state(scheme, steps=t))
    return marginal_distribution(evolve_density(scheme, rho, noise, t))


def _absorbed_distribution(scheme: WalkScheme, t: int, flip: str) -> Distribution:
    """Noiseless run with the flip folded into the coin (alternate) or the y-shift (Pauli)"""
    matrix = FLIPS[flip][0]
    state = initial_state(scheme, steps=t)
    if scheme.kind == SchemeKind.ALTERNATE:
        absorbed = WalkScheme.alternate(scheme.theta, coin=absorbed_coin(scheme.coin_operator, flip).result)
        return marginal_distribution(evolve_pure(absorbed, state, t))

    shift_x, shift_y = axis_moves(scheme)
    moves = [shift_x, lambda T: apply_coin(matrix, shift_y(T))]
    for _ in range(t):
        state = apply_moves(moves, state)
    return marginal_distribution(state)


def verify_twostate_symmetry(scheme: WalkScheme, t: int) -> SymmetryReport:
    """Deterministic bit and phase flips leave the two-state distributions unchanged"""
    if not scheme.is_two_state:
        raise ValueError(f"flip symmetry holds for two-state walks only, not {scheme.label}")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")

    baseline = _noiseless_distribution(scheme, t)
    deviations = {}
    for flip, (_, per_step, per_axis) in FLIPS.items():
        noisy = _noisy_distribution(scheme, t, NoiseSpec(per_step, 1.0))
        deviations[f"{flip}_per_step"] = _deviation(noisy, baseline)
        deviations[f"{flip}_per_axis"] = _deviation(_noisy_distribution(scheme, t, NoiseSpec(per_axis, 2.0)), baseline)
        deviations[f"{flip}_absorbed"] = _deviation(_absorbed_distribution(scheme, t, flip), noisy)

    passed = all(value <= EQUIVALENCE_TOLERANCE for value in deviations.values())
    logger.info(f"{scheme.label} flip symmetry at t={t}: {'holds' if passed else 'broken'}")
    return SymmetryReport(f"{scheme.label}_flip_symmetry_t{t}", passed, deviations)


def verify_grover_breakdown(k: int, t: int, p: float = 1.0) -> SymmetryReport:
    """State-flip noise at p=1 does not reduce the Grover walk to a pure evolution"""
    scheme = WalkScheme.grover()
    baseline = _noiseless_distribution(scheme, t)
    rho = evolve_density(scheme, to_density(initial_state(scheme, steps=t)),
                         NoiseSpec(NoiseKind.STATEFLIP4, p, k), t)
    deviation = _deviation(marginal_distribution(rho), baseline)
    mixedness = purity(rho)

    passed = deviation > BREAKDOWN_THRESHOLD and mixedness < 1 - PURITY_MARGIN
    logger.info(f"grover k={k} p={p} t={t}: deviation {deviation:.4f}, purity {mixedness:.6f}")
    return SymmetryReport(
        f"grover_breakdown_k{k}_t{t}", passed,
        {'distribution': deviation}, {'purity': mixedness},
    )


def single_flip_absorption_check(flip: np.ndarray = CYCLIC_FLIP, t: int = 5) -> SymmetryReport:
    """
    A single deterministic flip f after every Grover step absorbs into the coin.

    G commutes with every coin permutation, so (f S G)^t = f (S fG)^t f†;
    the noisy run from ψ matches the fG run from f†ψ up to a final coin-local f.
    """
    flip = np.asarray(flip, dtype=complex)
    scheme = WalkScheme.grover()

    rho = to_density(initial_state(scheme, steps=t))
    channel = single_flip_channel(flip, 1.0)
    for _ in range(t):
        rho = noisy_step_with_channel(scheme, rho, channel, ChannelSchedule.PER_STEP)

    absorbed = WalkScheme.grover(coin=CoinOperator(flip @ scheme.coin_operator.matrix))
    start = InitialCoinState(flip.conj().T @ default_coin_state(scheme).vector)
    deviation = _deviation(marginal_distribution(rho), _noiseless_distribution(absorbed, t, start))

    return SymmetryReport(
        f"single_flip_absorption_t{t}", deviation <= EQUIVALENCE_TOLERANCE, {'distribution': deviation},
    )


def run_verifications(kind: str) -> List[SymmetryReport]:
    """Fixed verification suites exposed on the command line"""
    if kind == 'symmetry':
        return [verify_twostate_symmetry(scheme, 10) for scheme in (WalkScheme.alternate(), WalkScheme.pauli())]
    if kind == 'breakdown':
        return [verify_grover_breakdown(k, 5) for k in (3, 23)]
    if kind == 'absorption':
        return [single_flip_absorption_check()]
    raise ValueError(f"unknown verification suite '{kind}'")
