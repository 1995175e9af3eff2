"""
Dense complex linear algebra for multi-qubit operators.

Computational basis is big-endian: qubit 0 is the most significant bit, so
|q0 q1 ... q(k-1)> has index sum(q_j * 2**(k-1-j)). The Kronecker product
follows the same convention (left factor owns the leading qubits).

Holds the DensityMatrix container, partial trace, qubit permutation, the
Bloch decomposition of two-qubit states and the correlation-tensor
quantities built on it (singular values, Horodecki CHSH criterion).
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Sequence, Tuple

import numpy as np

from config import (
    BLOCH_NORM_SLACK,
    CHSH_TOL,
    EIGENVALUE_FLOOR,
    HERMITIAN_TOL,
    TRACE_TOL,
)
from errors import InvalidDensityMatrixError, InvalidPermutationError, QubitIndexError

logger = logging.getLogger(__name__)

IDENTITY_2 = np.eye(2, dtype=complex)
IDENTITY_4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS: Tuple[np.ndarray, np.ndarray, np.ndarray] = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _qubit_count(dim: int) -> int:
    """Number of qubits for a dimension that must be a power of two."""
    k = int(dim).bit_length() - 1
    if dim < 1 or (1 << k) != dim:
        raise InvalidDensityMatrixError(f"Dimension {dim} is not a power of two")
    return k


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Unit-trace positive semidefinite Hermitian matrix on k qubits.

    Validation runs on construction unless ``check=False`` is passed, which
    library code uses for results of trace- and positivity-preserving maps.
    """

    matrix: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidDensityMatrixError(f"Density matrix must be square, got shape {mat.shape}")
        _qubit_count(mat.shape[0])
        if not np.all(np.isfinite(mat)):
            raise InvalidDensityMatrixError("Density matrix has non-finite entries")
        if self.check:
            _validate_density(mat)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def qubit_count(self) -> int:
        return _qubit_count(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues with tolerated negatives clamped to 0."""
        vals = np.linalg.eigvalsh(self.matrix)
        return np.where(vals < 0.0, 0.0, vals)

    def purity(self) -> float:
        """Tr(rho^2)."""
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.purity() - 1.0) <= tol


def _validate_density(mat: np.ndarray) -> None:
    if not np.allclose(mat, mat.conj().T, atol=HERMITIAN_TOL, rtol=0.0):
        raise InvalidDensityMatrixError("Density matrix is not Hermitian")
    tr = np.trace(mat)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidDensityMatrixError(f"Density matrix trace is {tr.real:.12g}, expected 1")
    min_eig = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2).min())
    if min_eig < EIGENVALUE_FLOOR:
        raise InvalidDensityMatrixError(f"Density matrix has negative eigenvalue {min_eig:.3e}")
    if min_eig < 0.0:
        logger.debug("Clamping eigenvalue %.3e to 0 for reporting", min_eig)


@dataclass(frozen=True)
class BlochForm:
    """
    Local Bloch vectors and 3x3 correlation matrix of a two-qubit state.

    Vectors must have norm at most 1 and correlation entries must lie in
    [-1, 1], up to BLOCH_NORM_SLACK.
    """

    a_vec: np.ndarray
    b_vec: np.ndarray
    corr: np.ndarray

    def __post_init__(self) -> None:
        a_vec = np.asarray(self.a_vec, dtype=float)
        b_vec = np.asarray(self.b_vec, dtype=float)
        corr = np.asarray(self.corr, dtype=float)
        if a_vec.shape != (3,) or b_vec.shape != (3,) or corr.shape != (3, 3):
            raise InvalidDensityMatrixError(
                f"Bloch form needs two 3-vectors and a 3x3 matrix, got {a_vec.shape}, {b_vec.shape}, {corr.shape}"
            )
        for name, vec in (("a_vec", a_vec), ("b_vec", b_vec)):
            if np.linalg.norm(vec) > 1.0 + BLOCH_NORM_SLACK:
                raise InvalidDensityMatrixError(f"Bloch vector {name} has norm {np.linalg.norm(vec):.6g} > 1")
        worst = float(np.max(np.abs(corr)))
        if worst > 1.0 + BLOCH_NORM_SLACK:
            raise InvalidDensityMatrixError(f"Correlation entry {worst:.6g} lies outside [-1, 1]")
        object.__setattr__(self, "a_vec", a_vec)
        object.__setattr__(self, "b_vec", b_vec)
        object.__setattr__(self, "corr", corr)


@dataclass(frozen=True)
class SingularTriple:
    """Correlation-matrix singular values in descending order."""

    t11: float
    t22: float
    t33: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.t11, self.t22, self.t33)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the left factor owns the most-significant qubits."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def multikron(*operators: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators, left to right."""
    if not operators:
        return np.ones((1, 1), dtype=complex)
    return reduce(kron, operators)


def ket_to_density(ket: Sequence[complex]) -> DensityMatrix:
    """Projector onto a normalized state vector."""
    vec = np.asarray(ket, dtype=complex).reshape(-1)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise InvalidDensityMatrixError("Cannot build a state from the zero vector")
    vec = vec / norm
    return DensityMatrix(np.outer(vec, vec.conj()))


def _check_indices(indices: Sequence[int], k: int) -> List[int]:
    idx = [int(i) for i in indices]
    for i in idx:
        if i < 0 or i >= k:
            raise QubitIndexError(f"Qubit index {i} out of range for {k} qubits")
    if len(set(idx)) != len(idx):
        raise QubitIndexError(f"Qubit indices {idx} are not distinct")
    return idx


def permute_operator(matrix: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Reorder qubits of an operator: output qubit j is input qubit perm[j]."""
    mat = np.asarray(matrix, dtype=complex)
    k = _qubit_count(mat.shape[0])
    order = [int(p) for p in perm]
    if sorted(order) != list(range(k)):
        raise InvalidPermutationError(f"{order} is not a permutation of 0..{k - 1}")
    tensor = mat.reshape([2] * (2 * k))
    axes = order + [k + p for p in order]
    return tensor.transpose(axes).reshape(mat.shape)


def permute_qubits(rho: DensityMatrix, perm: Sequence[int]) -> DensityMatrix:
    """Qubit j of the result is qubit perm[j] of rho; spectrum and trace are preserved."""
    return DensityMatrix(permute_operator(rho.matrix, perm), check=False)


def inverse_permutation(perm: Sequence[int]) -> List[int]:
    inv = [0] * len(perm)
    for j, p in enumerate(perm):
        inv[int(p)] = j
    return inv


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """
    Reduced state on the kept qubits, in the listed order.

    Args:
        rho: State on k qubits.
        keep: Distinct qubit indices to keep.

    Returns:
        DensityMatrix on len(keep) qubits.
    """
    k = rho.qubit_count
    kept = _check_indices(keep, k)
    traced = [q for q in range(k) if q not in kept]
    m = len(kept)
    reordered = permute_operator(rho.matrix, kept + traced)
    d_keep, d_rest = 2 ** m, 2 ** (k - m)
    reduced = np.einsum("ajbj->ab", reordered.reshape(d_keep, d_rest, d_keep, d_rest))
    return DensityMatrix(reduced, check=False)


def bloch_reconstruct(form: BlochForm) -> np.ndarray:
    """(1/4)(I + a.sigma x I + I x b.sigma + sum w_jk sigma_j x sigma_k)."""
    mat = np.array(IDENTITY_4)
    for j in range(3):
        mat = mat + form.a_vec[j] * kron(PAULIS[j], IDENTITY_2)
        mat = mat + form.b_vec[j] * kron(IDENTITY_2, PAULIS[j])
        for k in range(3):
            mat = mat + form.corr[j, k] * kron(PAULIS[j], PAULIS[k])
    return mat / 4.0


def bloch_decompose(rho: DensityMatrix) -> BlochForm:
    """Local Bloch vectors and correlation matrix w_jk = Tr[rho sigma_j x sigma_k]."""
    if rho.qubit_count != 2:
        raise InvalidDensityMatrixError(f"Bloch decomposition needs 2 qubits, got {rho.qubit_count}")
    mat = rho.matrix
    a_vec = np.array([np.real(np.trace(mat @ kron(s, IDENTITY_2))) for s in PAULIS])
    b_vec = np.array([np.real(np.trace(mat @ kron(IDENTITY_2, s))) for s in PAULIS])
    corr = np.array([[np.real(np.trace(mat @ kron(sj, sk))) for sk in PAULIS] for sj in PAULIS])
    return BlochForm(a_vec=a_vec, b_vec=b_vec, corr=corr)


def correlation_singular_values(rho: DensityMatrix) -> SingularTriple:
    """Descending singular values of the correlation matrix."""
    svals = np.linalg.svd(bloch_decompose(rho).corr, compute_uv=False)
    t11, t22, t33 = (float(v) for v in np.sort(svals)[::-1])
    return SingularTriple(t11=t11, t22=t22, t33=t33)


def chsh_value(rho: DensityMatrix) -> float:
    """t11^2 + t22^2 (Horodecki)."""
    triple = correlation_singular_values(rho)
    return triple.t11 ** 2 + triple.t22 ** 2


def chsh_local(rho: DensityMatrix) -> bool:
    """True when the state cannot violate CHSH."""
    return chsh_value(rho) <= 1.0 + CHSH_TOL
