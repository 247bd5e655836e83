"""
Entropies, mutual information and measurement-induced disturbance (MID).

Q(ρ) = I(ρ) − I(Π(ρ)), where Π measures each side of the bipartition in the
eigenbasis of its reduced state. Degenerate reduced spectra are refined to
rank-1 projectors by orthonormalizing the projections of the standard basis
vectors (ascending index) onto each degenerate subspace, so the measured
basis depends only on the eigenspaces, never on the eigensolver's choice.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from qwalk2d.hilbert import (
    PARTICLE_POSITION, X_Y, Bipartition, DensityOperator, InvalidStateError,
    partial_trace, purity,
)

logger = logging.getLogger(__name__)

NEGATIVE_EIGENVALUE_FLOOR = -1e-8
TRACE_TOLERANCE = 1e-10
DEGENERACY_TOLERANCE = 1e-10
RESIDUAL_TOLERANCE = 1e-12
BASELINE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralResolution:
    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]

    def projectors(self) -> List[np.ndarray]:
        """Rank-1 projectors |v_j⟩⟨v_j|"""
        return [np.outer(v, v.conj()) for v in self.vectors.T]


def _canonical_basis(block: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(block) built from projected standard basis vectors"""
    n, m = block.shape
    # e_i projected onto the subspace has coefficients conj(block[i, :])
    found = np.zeros((m, 0), dtype=complex)
    for i in range(n):
        w = block[i, :].conj()
        for _ in range(2):
            w = w - found @ (found.conj().T @ w)
        norm = np.linalg.norm(w)
        if norm <= RESIDUAL_TOLERANCE:
            continue
        found = np.column_stack([found, w / norm])
        if found.shape[1] == m:
            break
    return block @ found


def spectral_resolution(matrix: np.ndarray) -> SpectralResolution:
    """Eigen-decomposition of a Hermitian matrix refined to rank-1 projectors"""
    eigenvalues, vectors = linalg.eigh(matrix)
    tolerance = DEGENERACY_TOLERANCE * max(1.0, float(np.max(np.abs(eigenvalues))))

    refined_values, refined_vectors = [], []
    start = 0
    n = eigenvalues.shape[0]
    while start < n:
        stop = start + 1
        while stop < n and eigenvalues[stop] - eigenvalues[stop - 1] <= tolerance:
            stop += 1
        block = vectors[:, start:stop]
        if stop - start > 1:
            block = _canonical_basis(block)
        refined_vectors.append(block)
        refined_values.extend([float(np.mean(eigenvalues[start:stop]))] * (stop - start))
        start = stop

    return SpectralResolution(np.array(refined_values), np.hstack(refined_vectors))


def _entropy_of_probabilities(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    lowest = float(values.min()) if values.size else 0.0
    if lowest < NEGATIVE_EIGENVALUE_FLOOR:
        raise InvalidStateError(f"negative eigenvalue {lowest:.3e} below {NEGATIVE_EIGENVALUE_FLOOR}")
    values = values[values > 0]
    return max(0.0, float(-np.sum(values * np.log2(values))))


def _entropy(matrix: np.ndarray) -> float:
    trace = np.trace(matrix).real
    if abs(trace - 1.0) > TRACE_TOLERANCE:
        raise InvalidStateError(f"entropy needs a unit-trace operator, trace is {trace:.15f}")
    return _entropy_of_probabilities(linalg.eigvalsh(matrix))


def von_neumann_entropy(rho: Union[DensityOperator, np.ndarray]) -> float:
    """S(ρ) = −Σ λ log₂ λ in bits"""
    matrix = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    return _entropy(matrix)


def _as_bipartite(rho: DensityOperator, split: Bipartition) -> Tuple[np.ndarray, int, int, DensityOperator]:
    """ρ on side_a ⊗ side_b (A factors first), plus the traced-down operator"""
    reduced = partial_trace(rho, split.kept)
    order = [reduced.subsystems.index(name) for name in split.side_a + split.side_b]
    n = len(order)
    tensor = reduced.tensor.transpose(order + [i + n for i in order])
    dim_a = int(np.prod([reduced.dims[reduced.subsystems.index(s)] for s in split.side_a]))
    dim_b = int(np.prod([reduced.dims[reduced.subsystems.index(s)] for s in split.side_b]))
    return tensor.reshape(dim_a * dim_b, dim_a * dim_b), dim_a, dim_b, reduced


def _marginals(matrix: np.ndarray, dim_a: int, dim_b: int) -> Tuple[np.ndarray, np.ndarray]:
    blocks = matrix.reshape(dim_a, dim_b, dim_a, dim_b)
    return np.einsum('ajbj->ab', blocks), np.einsum('iaib->ab', blocks)


def mutual_information(rho: DensityOperator, split: Bipartition) -> float:
    """I(ρ) = S(ρ_A) + S(ρ_B) − S(ρ)"""
    matrix, dim_a, dim_b, _ = _as_bipartite(rho, split)
    rho_a, rho_b = _marginals(matrix, dim_a, dim_b)
    return _entropy(rho_a) + _entropy(rho_b) - _entropy(matrix)


def _measured_distribution(matrix: np.ndarray, dim_a: int, dim_b: int
                           ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Joint outcome probabilities p(j, k) in the refined marginal eigenbases"""
    rho_a, rho_b = _marginals(matrix, dim_a, dim_b)
    basis_a = spectral_resolution(rho_a).vectors
    basis_b = spectral_resolution(rho_b).vectors
    blocks = matrix.reshape(dim_a, dim_b, dim_a, dim_b)
    # diag of (U_A ⊗ U_B)† ρ (U_A ⊗ U_B), one factor at a time
    half = np.einsum('ij,ilkn,kj->jln', basis_a.conj(), blocks, basis_a, optimize=True)
    joint = np.einsum('lm,jln,nm->jm', basis_b.conj(), half, basis_b, optimize=True).real
    return np.clip(joint, 0.0, None), basis_a, basis_b


def measurement_channel(rho: DensityOperator, split: Bipartition) -> DensityOperator:
    """Π(ρ) = Σ_{j,k} (Π_A^j ⊗ Π_B^k) ρ (Π_A^j ⊗ Π_B^k) on the kept factors"""
    matrix, dim_a, dim_b, reduced = _as_bipartite(rho, split)
    joint, basis_a, basis_b = _measured_distribution(matrix, dim_a, dim_b)
    basis = np.kron(basis_a, basis_b)
    measured = (basis * joint.ravel()) @ basis.conj().T

    # back from (A, B) order to the kept subsystem order
    names = split.side_a + split.side_b
    dims = [reduced.dims[reduced.subsystems.index(s)] for s in names]
    inverse = [names.index(s) for s in reduced.subsystems]
    n = len(names)
    tensor = measured.reshape(dims + dims).transpose(inverse + [i + n for i in inverse])
    return DensityOperator(tensor.reshape(reduced.dim, reduced.dim),
                           reduced.subsystems, reduced.dims, None, rho.step)


def _information_parts(rho: DensityOperator, split: Bipartition) -> Tuple[float, float]:
    """(I(ρ), I(Π(ρ))) for one bipartition"""
    matrix, dim_a, dim_b, _ = _as_bipartite(rho, split)
    rho_a, rho_b = _marginals(matrix, dim_a, dim_b)
    total = _entropy(rho_a) + _entropy(rho_b) - _entropy(matrix)

    joint, _, _ = _measured_distribution(matrix, dim_a, dim_b)
    classical = (
        _entropy_of_probabilities(joint.sum(axis=1))
        + _entropy_of_probabilities(joint.sum(axis=0))
        - _entropy_of_probabilities(joint.ravel())
    )
    return total, classical


def mid(rho: DensityOperator, split: Bipartition) -> float:
    """Q(ρ) = I(ρ) − I(Π(ρ)), floored at zero"""
    total, classical = _information_parts(rho, split)
    q = total - classical
    logger.debug(f"MID {split.side_a}|{split.side_b} at step {rho.step}: raw {q:.3e}")
    return max(q, 0.0)


def mid_pp(rho: DensityOperator) -> float:
    """MID between the coin and the position"""
    return mid(rho, PARTICLE_POSITION)


def mid_xy(rho: DensityOperator) -> float:
    """MID between the x and y positions after tracing out the coin"""
    return mid(rho, X_Y)


def robustness_ratio(q_noisy: float, q_noiseless: float) -> Optional[float]:
    """R = Q_noisy / Q_noiseless, or None where the baseline vanishes"""
    if q_noiseless <= BASELINE_FLOOR:
        return None
    return q_noisy / q_noiseless


@dataclass(frozen=True)
class CorrelationRecord:
    """
    Correlations of one walk density operator.

    i_total and i_classical belong to the x–y bipartition, so
    q_xy = max(i_total − i_classical, 0).
    """
    step: int
    q_pp: float
    q_xy: float
    i_total: float
    i_classical: float
    purity: float


def correlation_record(rho: DensityOperator) -> CorrelationRecord:
    i_total, i_classical = _information_parts(rho, X_Y)
    return CorrelationRecord(
        step=rho.step,
        q_pp=mid_pp(rho),
        q_xy=max(i_total - i_classical, 0.0),
        i_total=i_total,
        i_classical=i_classical,
        purity=purity(rho),
    )


def correlation_series(states: Iterable[DensityOperator]) -> List[CorrelationRecord]:
    """One record per density operator, in iteration order"""
    records = []
    for rho in states:
        record = correlation_record(rho)
        logger.debug(
            f"step {record.step}: q_pp={record.q_pp:.6f} q_xy={record.q_xy:.6f} purity={record.purity:.6f}"
        )
        records.append(record)
    return records
