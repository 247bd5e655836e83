"""
Random-unitary noise channels acting on the coin factor, and noisy evolution
of walk density operators.

Every channel is a weighted set of coin unitaries F_i applied as
ρ → Σ_i w_i (F_i ⊗ 1) ρ (F_i ⊗ 1)†. Noise always follows the shift it is
attached to: after the whole step (per_step) or after each axis move
(per_axis, two-state walks only, with p′ = p/2 per application).
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from qwalk2d.config import Config
from qwalk2d.hilbert import DensityOperator, Distribution, PureState, marginal_distribution
from qwalk2d.schemes import (
    SIGMA_1, SIGMA_2, SIGMA_3, SchemeKind, WalkScheme,
    apply_coin, axis_moves, step_pure_iterative,
)

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-12


class NoiseKind(Enum):
    NONE = "none"
    BITFLIP_PER_AXIS = "bitflip_per_axis"
    BITFLIP_PER_STEP = "bitflip_per_step"
    PHASEFLIP_PER_AXIS = "phaseflip_per_axis"
    PHASEFLIP_PER_STEP = "phaseflip_per_step"
    STATEFLIP4 = "stateflip4"
    DEPOLARIZING2 = "depolarizing2"
    DEPOLARIZING4 = "depolarizing4"


class ChannelSchedule(Enum):
    PER_AXIS = "per_axis"
    PER_STEP = "per_step"


PER_AXIS_KINDS = (NoiseKind.BITFLIP_PER_AXIS, NoiseKind.PHASEFLIP_PER_AXIS)
TWO_STATE_KINDS = (
    NoiseKind.BITFLIP_PER_AXIS, NoiseKind.BITFLIP_PER_STEP,
    NoiseKind.PHASEFLIP_PER_AXIS, NoiseKind.PHASEFLIP_PER_STEP,
    NoiseKind.DEPOLARIZING2,
)
FOUR_STATE_KINDS = (NoiseKind.STATEFLIP4, NoiseKind.DEPOLARIZING4)


@dataclass(frozen=True, eq=False)
class KrausTerm:
    weight: float
    coin_op: np.ndarray
    label: str = ''

    def __post_init__(self):
        if not -WEIGHT_TOLERANCE <= self.weight <= 1 + WEIGHT_TOLERANCE:
            raise ValueError(f"Kraus weight {self.weight} outside [0, 1]")
        coin_op = np.array(self.coin_op, dtype=complex)
        error = np.max(np.abs(coin_op @ coin_op.conj().T - np.eye(coin_op.shape[0])))
        if error > 1e-12:
            raise ValueError(f"Kraus term '{self.label}' is not unitary (error {error:.3e})")
        coin_op.setflags(write=False)
        object.__setattr__(self, 'coin_op', coin_op)


@dataclass(frozen=True, eq=False)
class KrausSet:
    terms: Tuple[KrausTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("a channel needs at least one term")
        dims = {term.coin_op.shape[0] for term in terms}
        if len(dims) != 1:
            raise ValueError("all Kraus terms must act on the same coin dimension")
        total = sum(term.weight for term in terms)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"channel weights sum to {total}, not 1")
        object.__setattr__(self, 'terms', terms)

    @classmethod
    def identity(cls, coin_dim: int) -> 'KrausSet':
        return cls((KrausTerm(1.0, np.eye(coin_dim), 'identity'),))

    @property
    def coin_dim(self) -> int:
        return self.terms[0].coin_op.shape[0]

    @property
    def is_identity(self) -> bool:
        return len(self.terms) == 1 and np.array_equal(self.terms[0].coin_op, np.eye(self.coin_dim))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[KrausTerm]:
        return iter(self.terms)


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind = NoiseKind.NONE
    p: float = 0.0
    k: int = 3

    def __post_init__(self):
        kind = NoiseKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        limit = 2.0 if kind in PER_AXIS_KINDS else 1.0
        if not 0.0 <= self.p <= limit:
            raise ValueError(f"noise level p={self.p} outside [0, {limit:g}] for {kind.value}")
        if kind == NoiseKind.STATEFLIP4 and self.k not in (3, 6, 23):
            raise ValueError(f"state-flip k must be 3, 6 or 23, got {self.k}")

    @property
    def schedule(self) -> ChannelSchedule:
        return ChannelSchedule.PER_AXIS if self.kind in PER_AXIS_KINDS else ChannelSchedule.PER_STEP

    @property
    def coin_dim(self) -> Optional[int]:
        if self.kind in TWO_STATE_KINDS:
            return 2
        if self.kind in FOUR_STATE_KINDS:
            return 4
        return None

    @property
    def application_probability(self) -> float:
        """Weight of the noisy part at each application"""
        return self.p / 2 if self.kind in PER_AXIS_KINDS else self.p

    @property
    def label(self) -> str:
        if self.kind == NoiseKind.STATEFLIP4:
            return f"{self.kind.value}(k={self.k})"
        return self.kind.value


def _permutation_matrix(images: Sequence[int]) -> np.ndarray:
    """Matrix sending |i⟩ to |images[i]⟩"""
    n = len(images)
    matrix = np.zeros((n, n), dtype=complex)
    matrix[list(images), range(n)] = 1
    return matrix


CYCLIC_FLIP = np.array([
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
    [1, 0, 0, 0],
], dtype=complex)


def permutation_flip_set(k: int) -> List[np.ndarray]:
    """State-flip operators of the four-state coin: 3 cyclic, 6 transpositions or all 23"""
    if k == 3:
        return [np.linalg.matrix_power(CYCLIC_FLIP, n) for n in (1, 2, 3)]
    if k == 6:
        flips = []
        for i, j in itertools.combinations(range(4), 2):
            images = list(range(4))
            images[i], images[j] = j, i
            flips.append(_permutation_matrix(images))
        return flips
    if k == 23:
        return [
            _permutation_matrix(images)
            for images in itertools.permutations(range(4))
            if images != (0, 1, 2, 3)
        ]
    raise ValueError(f"k must be 3, 6 or 23, got {k}")


def cyclic_phase_set() -> List[np.ndarray]:
    """Cyclic phase flips r, r², r³ with r = diag(1, ω, ω², ω³), ω = e^{2πi/4}"""
    omega = np.exp(2j * np.pi / 4)
    r = np.diag(omega ** np.arange(4))
    return [np.linalg.matrix_power(r, n) for n in (1, 2, 3)]


def _channel(noisy: Sequence[Tuple[str, np.ndarray]], weight: float, coin_dim: int) -> KrausSet:
    """Equal-weight noisy terms in the given order, then the identity with the complement"""
    total = weight * len(noisy)
    terms = [KrausTerm(weight, op, label) for label, op in noisy if weight > 0]
    if 1.0 - total > WEIGHT_TOLERANCE:
        terms.append(KrausTerm(1.0 - total, np.eye(coin_dim), 'identity'))
    return KrausSet(tuple(terms))


def build_channel(noise: NoiseSpec, coin_dim: int) -> KrausSet:
    """Kraus set applied at each noise application point"""
    if noise.kind == NoiseKind.NONE:
        return KrausSet.identity(coin_dim)
    if noise.coin_dim != coin_dim:
        raise ValueError(
            f"{noise.kind.value} acts on a {noise.coin_dim}-state coin, not {coin_dim}"
        )

    p = noise.application_probability
    if noise.kind in (NoiseKind.BITFLIP_PER_AXIS, NoiseKind.BITFLIP_PER_STEP):
        return _channel([('sigma1', SIGMA_1)], p, coin_dim)
    if noise.kind in (NoiseKind.PHASEFLIP_PER_AXIS, NoiseKind.PHASEFLIP_PER_STEP):
        return _channel([('sigma3', SIGMA_3)], p, coin_dim)
    if noise.kind == NoiseKind.DEPOLARIZING2:
        paulis = [('sigma1', SIGMA_1), ('sigma2', SIGMA_2), ('sigma3', SIGMA_3)]
        return _channel(paulis, p / 3, coin_dim)
    if noise.kind == NoiseKind.STATEFLIP4:
        flips = [(f"f{i + 1}", f) for i, f in enumerate(permutation_flip_set(noise.k))]
        return _channel(flips, p / noise.k, coin_dim)

    flips = permutation_flip_set(3)
    phases = cyclic_phase_set()
    terms = [(f"f{i + 1}", f) for i, f in enumerate(flips)]
    terms += [(f"r{j + 1}", r) for j, r in enumerate(phases)]
    terms += [
        (f"r{j + 1}f{i + 1}", r @ f)
        for i, f in enumerate(flips)
        for j, r in enumerate(phases)
    ]
    return _channel(terms, p / 15, coin_dim)


def single_flip_channel(flip: np.ndarray, p: float = 1.0) -> KrausSet:
    """State-flip channel restricted to one flip operation (k = 1)"""
    flip = np.asarray(flip, dtype=complex)
    return _channel([('flip', flip)], p, flip.shape[0])


def _channel_on_matrix(matrix: np.ndarray, channel: KrausSet) -> np.ndarray:
    if channel.is_identity:
        return matrix
    c = channel.coin_dim
    P = matrix.shape[0] // c
    blocks = matrix.reshape(c, P, c, P)
    result = np.zeros_like(blocks)
    # fixed term order keeps the accumulation reproducible
    for term in channel:
        F = term.coin_op
        result += term.weight * np.einsum('ab,bpcq,dc->apdq', F, blocks, F.conj(), optimize=True)
    return result.reshape(matrix.shape)


def apply_channel(rho: DensityOperator, channel: KrausSet) -> DensityOperator:
    """ρ′ = Σ_i w_i (F_i ⊗ 1) ρ (F_i ⊗ 1)†"""
    if rho.subsystems[0] != 'coin' or rho.dims[0] != channel.coin_dim:
        raise ValueError(f"channel acts on a {channel.coin_dim}-state coin factor")
    if channel.is_identity:
        return rho
    matrix = _channel_on_matrix(rho.matrix, channel)
    return DensityOperator(matrix, rho.subsystems, rho.dims, rho.spec, rho.step)


def _conjugate(moves: Sequence[Callable], matrix: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """U ρ U† with U given by moves, applied column-wise twice"""
    D = matrix.shape[0]
    columns = matrix.reshape(shape + (D,))
    for move in moves:
        columns = move(columns)
    # (Uρ)† = ρU† for Hermitian ρ
    columns = columns.reshape(D, D).conj().T.reshape(shape + (D,))
    for move in moves:
        columns = move(columns)
    result = columns.reshape(D, D)
    return 0.5 * (result + result.conj().T)


def _resolve_schedule(scheme: WalkScheme, noise_schedule: ChannelSchedule,
                      schedule: Optional[ChannelSchedule]) -> ChannelSchedule:
    schedule = ChannelSchedule(schedule) if schedule is not None else noise_schedule
    if schedule == ChannelSchedule.PER_AXIS and scheme.kind == SchemeKind.GROVER:
        raise ValueError("per_axis noise needs a two-state walk; the grover step has no axis split")
    return schedule


def noisy_step_with_channel(scheme: WalkScheme, rho: DensityOperator, channel: KrausSet,
                            schedule: ChannelSchedule = ChannelSchedule.PER_STEP) -> DensityOperator:
    """One walk step on ρ with the channel applied after each shift group"""
    spec = rho.spec
    if spec is None or rho.subsystems != ('coin', 'x', 'y'):
        raise ValueError("noisy evolution needs a full coin ⊗ x ⊗ y operator")
    if rho.step >= spec.steps:
        raise ValueError(f"step budget exhausted at step {rho.step}")
    schedule = _resolve_schedule(scheme, ChannelSchedule.PER_STEP, schedule)

    moves = axis_moves(scheme)
    matrix = rho.matrix
    if schedule == ChannelSchedule.PER_AXIS:
        for move in moves:
            matrix = _conjugate([move], matrix, spec.shape)
            matrix = _channel_on_matrix(matrix, channel)
    else:
        matrix = _conjugate(moves, matrix, spec.shape)
        matrix = _channel_on_matrix(matrix, channel)

    evolved = DensityOperator.from_spec(spec, matrix, rho.step + 1)
    if Config.CHECK_INVARIANTS:
        evolved.validate()
    return evolved


def noisy_step(scheme: WalkScheme, rho: DensityOperator, noise: NoiseSpec,
               schedule: Optional[ChannelSchedule] = None) -> DensityOperator:
    """One noisy walk step"""
    schedule = _resolve_schedule(scheme, noise.schedule, schedule)
    if noise.kind != NoiseKind.NONE and schedule != noise.schedule:
        raise ValueError(
            f"{noise.kind.value} is only defined with the {noise.schedule.value} schedule"
        )
    channel = build_channel(noise, scheme.coin_dim)
    return noisy_step_with_channel(scheme, rho, channel, schedule)


def iter_density(scheme: WalkScheme, rho: DensityOperator, noise: NoiseSpec,
                 steps: int) -> Iterator[DensityOperator]:
    """Yield ρ at the current step and after each of the next `steps` noisy steps"""
    channel = build_channel(noise, scheme.coin_dim)
    schedule = _resolve_schedule(scheme, noise.schedule, None)
    logger.debug(f"{scheme.label} density evolution with {noise.label}: {len(channel)} Kraus terms")
    yield rho
    for _ in range(steps):
        rho = noisy_step_with_channel(scheme, rho, channel, schedule)
        yield rho


def evolve_density(scheme: WalkScheme, rho: DensityOperator, noise: NoiseSpec,
                   steps: int) -> DensityOperator:
    """Advance ρ by several noisy steps"""
    for rho in iter_density(scheme, rho, noise, steps):
        pass
    return rho


def flip_trajectories(scheme: WalkScheme, state: PureState, channel: KrausSet, steps: int,
                      schedule: ChannelSchedule = ChannelSchedule.PER_STEP
                      ) -> List[Tuple[float, PureState]]:
    """Unravel a random-unitary noisy evolution into weighted pure trajectories"""
    schedule = _resolve_schedule(scheme, ChannelSchedule.PER_STEP, schedule)
    moves = axis_moves(scheme)
    points = steps * (len(moves) if schedule == ChannelSchedule.PER_AXIS else 1)

    trajectories = []
    for history in itertools.product(channel.terms, repeat=points):
        weight = float(np.prod([term.weight for term in history]))
        psi = state
        choices = iter(history)
        for _ in range(steps):
            if schedule == ChannelSchedule.PER_AXIS:
                tensor = psi.tensor
                for move in moves:
                    tensor = apply_coin(next(choices).coin_op, move(tensor))
                psi = PureState.from_tensor(psi.spec, tensor, psi.step + 1)
            else:
                psi = step_pure_iterative(scheme, psi)
                psi = PureState.from_tensor(psi.spec, apply_coin(next(choices).coin_op, psi.tensor), psi.step)
        trajectories.append((weight, psi))
    return trajectories


def trajectory_distribution(scheme: WalkScheme, state: PureState, channel: KrausSet, steps: int,
                            schedule: ChannelSchedule = ChannelSchedule.PER_STEP) -> Distribution:
    """Lattice distribution averaged over every noise history"""
    total = None
    for weight, psi in flip_trajectories(scheme, state, channel, steps, schedule):
        contribution = weight * marginal_distribution(psi).probabilities
        total = contribution if total is None else total + contribution
    return Distribution(state.spec, total)
