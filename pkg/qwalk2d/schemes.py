"""
Coin and shift operators for the three two-dimensional walks.

Three step implementations are kept side by side:

* step_pure_iterative: amplitude recurrences evaluated with lattice rolls
  (the fast pure-state path);
* step_pure_operator / step_unitary_matrix: the explicit operator product
  built from scipy.sparse shift and coin matrices (the reference);
* axis_moves: the per-axis factors acting on batched tensors, used by the
  density-matrix path so ρ can be conjugated column by column.

Shifts are cyclic on the L×L lattice. Inside the step budget no amplitude
reaches the wrap, so the cyclic and open-boundary walks coincide.

The Grover recurrences follow from S_(x,y)(G ⊗ 1). In the printed form of
those relations the C-term of the B-update carries the index (x−1, y−1);
the shift structure requires (x+1, y−1), which is what is implemented.
"""

import functools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from qwalk2d.hilbert import HilbertSpec, PureState

logger = logging.getLogger(__name__)

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

# Displacement (dx, dy) of each coin basis state
GROVER_DISPLACEMENTS = ((-1, -1), (-1, 1), (1, -1), (1, 1))
X_DISPLACEMENTS = ((-1, 0), (1, 0))
Y_DISPLACEMENTS = ((0, -1), (0, 1))

UNITARY_TOLERANCE = 1e-12


class SchemeKind(Enum):
    GROVER = "grover"
    ALTERNATE = "alternate"
    PAULI = "pauli"


@dataclass(frozen=True, eq=False)
class CoinOperator:
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"coin must be 2x2 or 4x4, got {matrix.shape}")
        error = np.max(np.abs(matrix @ matrix.conj().T - np.eye(matrix.shape[0])))
        if error > UNITARY_TOLERANCE:
            raise ValueError(f"coin is not unitary (error {error:.3e})")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def rotation_coin(theta: float) -> CoinOperator:
    """B(θ) = [[cos θ, sin θ], [sin θ, −cos θ]]"""
    c, s = np.cos(theta), np.sin(theta)
    return CoinOperator(np.array([[c, s], [s, -c]], dtype=complex))


def grover_coin() -> CoinOperator:
    """Grover diffusion coin G = ½J − 1"""
    return CoinOperator(np.full((4, 4), 0.5, dtype=complex) - np.eye(4))


@dataclass(frozen=True, eq=False)
class WalkScheme:
    kind: SchemeKind
    theta: float = np.pi / 4
    coin: Optional[CoinOperator] = None

    def __post_init__(self):
        kind = SchemeKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if self.coin is not None:
            if kind == SchemeKind.PAULI:
                raise ValueError("the Pauli walk is coin-free")
            if self.coin.dim != self.coin_dim:
                raise ValueError(
                    f"{kind.value} walk needs a {self.coin_dim}-dimensional coin, got {self.coin.dim}"
                )

    @classmethod
    def grover(cls, coin: Optional[CoinOperator] = None) -> 'WalkScheme':
        return cls(SchemeKind.GROVER, coin=coin)

    @classmethod
    def alternate(cls, theta: float = np.pi / 4, coin: Optional[CoinOperator] = None) -> 'WalkScheme':
        return cls(SchemeKind.ALTERNATE, theta=theta, coin=coin)

    @classmethod
    def pauli(cls) -> 'WalkScheme':
        return cls(SchemeKind.PAULI)

    @property
    def coin_dim(self) -> int:
        return 4 if self.kind == SchemeKind.GROVER else 2

    @property
    def is_two_state(self) -> bool:
        return self.coin_dim == 2

    @property
    def coin_operator(self) -> Optional[CoinOperator]:
        if self.coin is not None:
            return self.coin
        if self.kind == SchemeKind.GROVER:
            return grover_coin()
        if self.kind == SchemeKind.ALTERNATE:
            return rotation_coin(self.theta)
        return None

    @property
    def label(self) -> str:
        return self.kind.value


@dataclass(frozen=True, eq=False)
class InitialCoinState:
    vector: np.ndarray

    def __post_init__(self):
        vector = np.array(self.vector, dtype=complex).ravel()
        if vector.shape not in ((2,), (4,)):
            raise ValueError(f"coin state must have 2 or 4 components, got {vector.shape[0]}")
        norm = np.vdot(vector, vector).real
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"coin state is not normalized (norm² = {norm:.15f})")
        vector.setflags(write=False)
        object.__setattr__(self, 'vector', vector)

    @classmethod
    def two_state(cls, delta: float, eta: float) -> 'InitialCoinState':
        """cos(δ/2)|0⟩ + e^{iη} sin(δ/2)|1⟩"""
        return cls(np.array([np.cos(delta / 2), np.exp(1j * eta) * np.sin(delta / 2)]))

    @classmethod
    def symmetric_two_state(cls) -> 'InitialCoinState':
        """(|0⟩ + i|1⟩)/√2"""
        return cls(np.array([1, 1j]) / np.sqrt(2))

    @classmethod
    def grover_state(cls) -> 'InitialCoinState':
        """½(|0⟩ − |1⟩ − |2⟩ + |3⟩), the maximally spreading Grover state"""
        return cls(np.array([1, -1, -1, 1]) / 2)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


def default_coin_state(scheme: WalkScheme) -> InitialCoinState:
    if scheme.kind == SchemeKind.GROVER:
        return InitialCoinState.grover_state()
    return InitialCoinState.symmetric_two_state()


def initial_state(scheme: WalkScheme, coin: Optional[InitialCoinState] = None,
                  steps: int = 0) -> PureState:
    """Coin state ⊗ |ψ_0,0⟩ on a lattice budgeted for `steps` steps"""
    coin = coin or default_coin_state(scheme)
    if coin.dim != scheme.coin_dim:
        raise ValueError(
            f"{scheme.label} walk needs a {scheme.coin_dim}-state coin, got {coin.dim} components"
        )
    spec = HilbertSpec(scheme.coin_dim, steps)
    tensor = np.zeros(spec.shape, dtype=complex)
    t = spec.origin_offset
    tensor[:, t, t] = coin.vector
    return PureState.from_tensor(spec, tensor)


def _check_budget(state: PureState) -> None:
    if state.step >= state.spec.steps:
        raise ValueError(
            f"step budget exhausted: state at step {state.step} on a {state.spec.steps}-step lattice"
        )


# -- iterative recurrences ------------------------------------------------

def _at(field: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """field evaluated at (x+dx, y+dy)"""
    return np.roll(field, (-dx, -dy), axis=(0, 1))


def _grover_recurrence(g: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    A, B, C, D = tensor
    return np.stack([
        _at(g[0, 0] * A + g[0, 1] * B + g[0, 2] * C + g[0, 3] * D, 1, 1),
        _at(g[1, 0] * A + g[1, 1] * B + g[1, 2] * C + g[1, 3] * D, 1, -1),
        _at(g[2, 0] * A + g[2, 1] * B + g[2, 2] * C + g[2, 3] * D, -1, 1),
        _at(g[3, 0] * A + g[3, 1] * B + g[3, 2] * C + g[3, 3] * D, -1, -1),
    ])


def _alternate_recurrence(u: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    A, B = tensor
    up = u[0, 0] * A + u[0, 1] * B
    down = u[1, 0] * A + u[1, 1] * B
    return np.stack([
        u[0, 0] * _at(up, 1, 1) + u[0, 1] * _at(down, -1, 1),
        u[1, 0] * _at(up, 1, -1) + u[1, 1] * _at(down, -1, -1),
    ])


def _pauli_recurrence(tensor: np.ndarray) -> np.ndarray:
    A, B = tensor
    return 0.5 * np.stack([
        _at(A, 1, 1) + _at(B, -1, 1) + _at(A, 1, -1) - _at(B, -1, -1),
        _at(A, 1, 1) + _at(B, -1, 1) - _at(A, 1, -1) + _at(B, -1, -1),
    ])


def step_pure_iterative(scheme: WalkScheme, state: PureState) -> PureState:
    """One step through the scheme's amplitude recurrences"""
    _check_budget(state)
    if state.spec.coin_dim != scheme.coin_dim:
        raise ValueError("state and scheme coin dimensions differ")
    if scheme.kind == SchemeKind.GROVER:
        tensor = _grover_recurrence(scheme.coin_operator.matrix, state.tensor)
    elif scheme.kind == SchemeKind.ALTERNATE:
        tensor = _alternate_recurrence(scheme.coin_operator.matrix, state.tensor)
    else:
        tensor = _pauli_recurrence(state.tensor)
    return PureState.from_tensor(state.spec, tensor, state.step + 1)


# -- operator form ----------------------------------------------------------

def _translation(L: int, dx: int, dy: int) -> sparse.csr_matrix:
    """Cyclic lattice translation |x+dx, y+dy⟩⟨x, y|"""
    ix, iy = np.divmod(np.arange(L * L), L)
    rows = ((ix + dx) % L) * L + (iy + dy) % L
    cols = np.arange(L * L)
    data = np.ones(L * L, dtype=complex)
    return sparse.csr_matrix((data, (rows, cols)), shape=(L * L, L * L))


def shift_operator(spec: HilbertSpec, displacements: Sequence[Tuple[int, int]]) -> sparse.csr_matrix:
    """Σ_c |c⟩⟨c| ⊗ T(displacement_c)"""
    if len(displacements) != spec.coin_dim:
        raise ValueError("one displacement per coin state is required")
    L = spec.lattice_extent
    blocks = [_translation(L, dx, dy) for dx, dy in displacements]
    return sparse.block_diag(blocks, format='csr')


def coin_operator_matrix(spec: HilbertSpec, coin: np.ndarray) -> sparse.csr_matrix:
    """coin ⊗ 1 on the full lattice"""
    L = spec.lattice_extent
    return sparse.kron(sparse.csr_matrix(coin), sparse.identity(L * L, dtype=complex), format='csr')


@functools.lru_cache(maxsize=32)
def _step_operator(scheme: WalkScheme, spec: HilbertSpec) -> sparse.csr_matrix:
    if scheme.kind == SchemeKind.GROVER:
        coin = coin_operator_matrix(spec, scheme.coin_operator.matrix)
        return shift_operator(spec, GROVER_DISPLACEMENTS) @ coin
    if scheme.kind == SchemeKind.ALTERNATE:
        coin = coin_operator_matrix(spec, scheme.coin_operator.matrix)
        s_x = shift_operator(spec, X_DISPLACEMENTS) @ coin
        s_y = shift_operator(spec, Y_DISPLACEMENTS) @ coin
        return s_y @ s_x
    # |±⟩⟨±| = H|0/1⟩⟨0/1|H, so S_σ1 is the y-shift conjugated by H
    hadamard = coin_operator_matrix(spec, HADAMARD)
    s_sigma3 = shift_operator(spec, X_DISPLACEMENTS)
    s_sigma1 = hadamard @ shift_operator(spec, Y_DISPLACEMENTS) @ hadamard
    return s_sigma1 @ s_sigma3


def step_operator(scheme: WalkScheme, spec: HilbertSpec) -> sparse.csr_matrix:
    """Sparse single-step unitary of the scheme"""
    if spec.coin_dim != scheme.coin_dim:
        raise ValueError("spec and scheme coin dimensions differ")
    return _step_operator(scheme, spec)


def step_pure_operator(scheme: WalkScheme, state: PureState) -> PureState:
    """One step by the explicit operator product"""
    _check_budget(state)
    amplitudes = step_operator(scheme, state.spec) @ state.amplitudes
    return PureState(state.spec, amplitudes, state.step + 1)


def step_unitary_matrix(scheme: WalkScheme, spec: HilbertSpec) -> np.ndarray:
    """Dense D×D single-step unitary"""
    return step_operator(scheme, spec).toarray()


# -- per-axis moves on batched tensors -------------------------------------

Move = Callable[[np.ndarray], np.ndarray]


def apply_coin(coin: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    """Act with a coin matrix on axis 0 of a (coin, x, y, ...) tensor"""
    return np.tensordot(coin, tensor, axes=(1, 0))


def conditional_shift(tensor: np.ndarray, displacements: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Translate each coin slice by its displacement"""
    return np.stack([
        np.roll(tensor[c], (dx, dy), axis=(0, 1))
        for c, (dx, dy) in enumerate(displacements)
    ])


def axis_moves(scheme: WalkScheme) -> List[Move]:
    """Factors of one step in application order; noise may act between them"""
    if scheme.kind == SchemeKind.GROVER:
        g = scheme.coin_operator.matrix
        return [lambda T: conditional_shift(apply_coin(g, T), GROVER_DISPLACEMENTS)]
    if scheme.kind == SchemeKind.ALTERNATE:
        b = scheme.coin_operator.matrix
        return [
            lambda T: conditional_shift(apply_coin(b, T), X_DISPLACEMENTS),
            lambda T: conditional_shift(apply_coin(b, T), Y_DISPLACEMENTS),
        ]
    return [
        lambda T: conditional_shift(T, X_DISPLACEMENTS),
        lambda T: apply_coin(HADAMARD, conditional_shift(apply_coin(HADAMARD, T), Y_DISPLACEMENTS)),
    ]


def apply_moves(moves: Sequence[Move], state: PureState) -> PureState:
    """Run one step given as a sequence of moves on a pure state"""
    _check_budget(state)
    tensor = state.tensor
    for move in moves:
        tensor = move(tensor)
    return PureState.from_tensor(state.spec, tensor, state.step + 1)


def evolve_pure(scheme: WalkScheme, state: PureState, steps: int,
                method: str = 'iterative') -> PureState:
    """Advance a pure state by several noiseless steps"""
    stepper = {
        'iterative': step_pure_iterative,
        'operator': step_pure_operator,
    }.get(method)
    if stepper is None:
        raise ValueError(f"unknown evolution method '{method}'")
    for _ in range(steps):
        state = stepper(scheme, state)
    logger.debug(f"{scheme.label} pure evolution reached step {state.step}")
    return state
