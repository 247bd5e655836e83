"""
Hilbert-space bookkeeping for the coin ⊗ x ⊗ y walk space.

States are stored coin-major: the flat index of (c, x, y) is
c·L² + (x+t)·L + (y+t) with L = 2t+1 and t the step budget.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

SUBSYSTEMS = ('coin', 'x', 'y')

# norm, trace and probability-sum tolerance for constructed states
NORMALIZATION_TOLERANCE = 1e-12


class InvalidStateError(ValueError):
    """Raised when a state violates its physical invariants"""


class InvariantError(InvalidStateError):
    """Raised when a runtime invariant check on an evolved state fails"""


@dataclass(frozen=True)
class HilbertSpec:
    coin_dim: int
    steps: int

    def __post_init__(self):
        if self.coin_dim not in (2, 4):
            raise ValueError(f"coin_dim must be 2 or 4, got {self.coin_dim}")
        if self.steps < 0:
            raise ValueError(f"steps must be non-negative, got {self.steps}")

    @property
    def lattice_extent(self) -> int:
        return 2 * self.steps + 1

    @property
    def origin_offset(self) -> int:
        return self.steps

    @property
    def dim(self) -> int:
        return self.coin_dim * self.lattice_extent ** 2

    @property
    def shape(self) -> Tuple[int, int, int]:
        L = self.lattice_extent
        return (self.coin_dim, L, L)

    @property
    def coordinates(self) -> np.ndarray:
        """Lattice coordinates −t … t along one axis"""
        return np.arange(-self.steps, self.steps + 1)

    def factor_dims(self) -> dict:
        L = self.lattice_extent
        return {'coin': self.coin_dim, 'x': L, 'y': L}


def flat_index(spec: HilbertSpec, c: int, x: int, y: int) -> int:
    """Map (coin, x, y) to the flat coin-major index"""
    t = spec.origin_offset
    if not 0 <= c < spec.coin_dim:
        raise IndexError(f"coin label {c} outside [0, {spec.coin_dim})")
    if abs(x) > t or abs(y) > t:
        raise IndexError(f"coordinate ({x}, {y}) outside |x|, |y| <= {t}")
    L = spec.lattice_extent
    return c * L * L + (x + t) * L + (y + t)


def unflat_index(spec: HilbertSpec, index: int) -> Tuple[int, int, int]:
    """Inverse of flat_index"""
    if not 0 <= index < spec.dim:
        raise IndexError(f"flat index {index} outside [0, {spec.dim})")
    L = spec.lattice_extent
    t = spec.origin_offset
    c, rest = divmod(index, L * L)
    ix, iy = divmod(rest, L)
    return c, ix - t, iy - t


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    spec: HilbertSpec
    amplitudes: np.ndarray
    step: int = 0

    def __post_init__(self):
        amplitudes = _frozen(np.ravel(self.amplitudes))
        if amplitudes.shape != (self.spec.dim,):
            raise InvalidStateError(
                f"expected {self.spec.dim} amplitudes, got {amplitudes.shape[0]}"
            )
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidStateError(f"step {self.step}: state norm {norm:.15f} deviates from 1")
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def from_tensor(cls, spec: HilbertSpec, tensor: np.ndarray, step: int = 0) -> 'PureState':
        return cls(spec, np.reshape(tensor, spec.dim), step)

    @property
    def tensor(self) -> np.ndarray:
        """Amplitudes viewed as a (coin, x, y) array"""
        return self.amplitudes.reshape(self.spec.shape)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    subsystems: Tuple[str, ...] = SUBSYSTEMS
    dims: Tuple[int, ...] = ()
    spec: Optional[HilbertSpec] = None
    step: int = 0

    def __post_init__(self):
        subsystems = tuple(self.subsystems)
        if not subsystems or any(name not in SUBSYSTEMS for name in subsystems):
            raise ValueError(f"unknown subsystems {subsystems}")
        if list(subsystems) != sorted(subsystems, key=SUBSYSTEMS.index) or len(set(subsystems)) != len(subsystems):
            raise ValueError(f"subsystems must be distinct and in {SUBSYSTEMS} order")

        dims = tuple(int(d) for d in self.dims)
        if not dims and self.spec is not None:
            dims = tuple(self.spec.factor_dims()[name] for name in subsystems)
        if len(dims) != len(subsystems):
            raise ValueError("one dimension per subsystem is required")

        matrix = _frozen(self.matrix)
        size = int(np.prod(dims))
        if matrix.shape != (size, size):
            raise InvalidStateError(f"matrix shape {matrix.shape} does not match dims {dims}")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvariantError(f"step {self.step}: trace {trace.real:.15f} deviates from 1")

        object.__setattr__(self, 'subsystems', subsystems)
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def from_spec(cls, spec: HilbertSpec, matrix: np.ndarray, step: int = 0) -> 'DensityOperator':
        return cls(matrix, SUBSYSTEMS, spec.shape, spec, step)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def tensor(self) -> np.ndarray:
        """Matrix viewed with one row axis and one column axis per subsystem"""
        return self.matrix.reshape(self.dims + self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        from scipy.linalg import eigvalsh
        return float(eigvalsh(self.matrix, subset_by_index=[0, 0])[0])

    def validate(self, trace_tol: float = 1e-12, hermitian_tol: float = 1e-12,
                 psd_tol: float = 1e-10) -> None:
        """Check Hermiticity, unit trace and positivity"""
        herm = self.hermiticity_error()
        if herm > hermitian_tol:
            raise InvariantError(f"step {self.step}: Hermiticity error {herm:.3e}")
        trace = self.trace()
        if abs(trace - 1.0) > trace_tol:
            raise InvariantError(f"step {self.step}: trace {trace.real:.15f} deviates from 1")
        lowest = self.min_eigenvalue()
        if lowest < -psd_tol:
            raise InvariantError(f"step {self.step}: negative eigenvalue {lowest:.3e}")


@dataclass(frozen=True, eq=False)
class Distribution:
    spec: HilbertSpec
    probabilities: np.ndarray

    def __post_init__(self):
        L = self.spec.lattice_extent
        probabilities = np.array(self.probabilities, dtype=float)
        if probabilities.shape != (L, L):
            raise InvalidStateError(f"expected a {L}x{L} lattice, got {probabilities.shape}")
        if probabilities.min() < -NORMALIZATION_TOLERANCE:
            raise InvalidStateError(f"negative probability {probabilities.min():.3e}")
        total = float(probabilities.sum())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidStateError(f"probabilities sum to {total:.15f}, not 1")
        probabilities.setflags(write=False)
        object.__setattr__(self, 'probabilities', probabilities)

    def at(self, x: int, y: int) -> float:
        t = self.spec.origin_offset
        if abs(x) > t or abs(y) > t:
            raise IndexError(f"coordinate ({x}, {y}) outside |x|, |y| <= {t}")
        return float(self.probabilities[x + t, y + t])

    def total(self) -> float:
        return float(self.probabilities.sum())

    def x_marginal(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    def y_marginal(self) -> np.ndarray:
        return self.probabilities.sum(axis=0)


@dataclass(frozen=True)
class Bipartition:
    side_a: Tuple[str, ...]
    side_b: Tuple[str, ...]

    def __post_init__(self):
        side_a, side_b = tuple(self.side_a), tuple(self.side_b)
        if not side_a or not side_b:
            raise ValueError("both sides of a bipartition must be nonempty")
        for name in side_a + side_b:
            if name not in SUBSYSTEMS:
                raise ValueError(f"unknown subsystem '{name}'")
        if set(side_a) & set(side_b) or len(set(side_a + side_b)) != len(side_a + side_b):
            raise ValueError("bipartition sides must be disjoint")
        object.__setattr__(self, 'side_a', tuple(sorted(side_a, key=SUBSYSTEMS.index)))
        object.__setattr__(self, 'side_b', tuple(sorted(side_b, key=SUBSYSTEMS.index)))

    @property
    def kept(self) -> Tuple[str, ...]:
        return tuple(name for name in SUBSYSTEMS if name in self.side_a + self.side_b)


PARTICLE_POSITION = Bipartition(('coin',), ('x', 'y'))
X_Y = Bipartition(('x',), ('y',))


def marginal_distribution(state: Union[PureState, DensityOperator]) -> Distribution:
    """Lattice distribution P(x, y) summed over the coin"""
    if isinstance(state, PureState):
        probabilities = np.sum(np.abs(state.tensor) ** 2, axis=0)
        return Distribution(state.spec, probabilities)

    if state.spec is None or state.subsystems != SUBSYSTEMS:
        raise InvalidStateError("marginal_distribution needs a full coin ⊗ x ⊗ y operator")
    populations = np.real(np.diagonal(state.matrix)).reshape(state.spec.shape)
    if populations.min() < -NORMALIZATION_TOLERANCE:
        raise InvalidStateError(f"step {state.step}: negative population {populations.min():.3e}")
    # rounding can leave populations of order −1e-17
    probabilities = np.clip(populations.sum(axis=0), 0.0, None)
    return Distribution(state.spec, probabilities)


def partial_trace(rho: DensityOperator, keep: Sequence[str]) -> DensityOperator:
    """Trace out every subsystem not listed in keep"""
    keep = list(keep)
    if not keep:
        raise ValueError("partial_trace needs at least one subsystem to keep")
    for name in keep:
        if name not in rho.subsystems:
            raise ValueError(f"subsystem '{name}' not present in {rho.subsystems}")

    kept = tuple(name for name in rho.subsystems if name in keep)
    if kept == rho.subsystems:
        return rho

    n = len(rho.subsystems)
    rows = [chr(ord('a') + i) for i in range(n)]
    cols = [chr(ord('n') + i) for i in range(n)]
    for i, name in enumerate(rho.subsystems):
        if name not in kept:
            cols[i] = rows[i]
    out_rows = [rows[i] for i, name in enumerate(rho.subsystems) if name in kept]
    out_cols = [cols[i] for i, name in enumerate(rho.subsystems) if name in kept]
    subscripts = ''.join(rows) + ''.join(cols) + '->' + ''.join(out_rows) + ''.join(out_cols)

    reduced = np.einsum(subscripts, rho.tensor)
    dims = tuple(d for d, name in zip(rho.dims, rho.subsystems) if name in kept)
    size = int(np.prod(dims))
    return DensityOperator(reduced.reshape(size, size), kept, dims, None, rho.step)


def to_density(state: PureState) -> DensityOperator:
    """Outer product |ψ⟩⟨ψ|"""
    matrix = np.outer(state.amplitudes, state.amplitudes.conj())
    return DensityOperator.from_spec(state.spec, matrix, state.step)


def embed(state: PureState, steps: int) -> PureState:
    """Re-host a pure state on a lattice sized for a larger step budget"""
    if steps < state.spec.steps:
        raise ValueError(f"cannot shrink budget from {state.spec.steps} to {steps}")
    spec = HilbertSpec(state.spec.coin_dim, steps)
    pad = steps - state.spec.steps
    tensor = np.pad(state.tensor, ((0, 0), (pad, pad), (pad, pad)))
    return PureState.from_tensor(spec, tensor, state.step)


def purity(rho: DensityOperator) -> float:
    """tr(ρ²) for a Hermitian ρ"""
    return float(np.vdot(rho.matrix, rho.matrix).real)


def axis_asymmetry(distribution: Distribution) -> float:
    """max |P(x, y) − P(y, x)|"""
    P = distribution.probabilities
    return float(np.max(np.abs(P - P.T)))
