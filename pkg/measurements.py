"""
Four-outcome joint measurements on a party's two qubits.

Outcome (o1, o2) is stored at index 2*o1 + o2; basis vectors b1..b4 are
assigned to (0,0), (0,1), (1,0), (1,1) in the order they are listed.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from config import HERMITIAN_TOL, POVM_COMPLETENESS_TOL, POVM_PSD_TOL
from errors import InvalidPovmError, ParameterRangeError
from linalg_core import IDENTITY_4
from schemas import PovmKind, PovmSpec

logger = logging.getLogger(__name__)

OUTCOME_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True, eq=False)
class FourOutcomePovm:
    """Four PSD operators on two qubits summing to the identity."""

    elements: np.ndarray

    def __post_init__(self) -> None:
        elems = np.array(self.elements, dtype=complex)
        if elems.shape != (4, 4, 4):
            raise InvalidPovmError(f"POVM needs 4 operators of shape 4x4, got {elems.shape}")
        for k, op in enumerate(elems):
            if not np.allclose(op, op.conj().T, atol=HERMITIAN_TOL, rtol=0.0):
                raise InvalidPovmError(f"POVM element {k} is not Hermitian")
            min_eig = float(np.linalg.eigvalsh(op).min())
            if min_eig < -POVM_PSD_TOL:
                raise InvalidPovmError(f"POVM element {k} has negative eigenvalue {min_eig:.3e}")
        deviation = float(np.abs(elems.sum(axis=0) - IDENTITY_4).max())
        if deviation > POVM_COMPLETENESS_TOL:
            raise InvalidPovmError(f"POVM elements sum to identity only within {deviation:.3e}")
        elems.setflags(write=False)
        object.__setattr__(self, "elements", elems)

    def __getitem__(self, outcome: int) -> np.ndarray:
        return self.elements[outcome]

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        """Tr[E_k rho] for a two-qubit density matrix."""
        return np.real(np.einsum("kij,ji->k", self.elements, rho))


def povm_from_vectors(vectors: Sequence[Sequence[complex]]) -> FourOutcomePovm:
    """Projectors onto four orthonormal two-qubit vectors, in outcome order."""
    vecs = np.asarray(vectors, dtype=complex)
    if vecs.shape != (4, 4):
        raise InvalidPovmError(f"Need four 4-component vectors, got shape {vecs.shape}")
    return FourOutcomePovm(np.einsum("ki,kj->kij", vecs, vecs.conj()))


def entangled_basis(alpha1: float) -> FourOutcomePovm:
    """|01>, |10>, a1|00> + a2|11>, a2|00> - a1|11> with a2 = sqrt(1 - a1^2)."""
    alpha1 = float(alpha1)
    if not 0.0 < alpha1 < 1.0:
        raise ParameterRangeError(f"alpha1 must lie in (0, 1), got {alpha1}")
    alpha2 = np.sqrt(1.0 - alpha1 ** 2)
    return povm_from_vectors(
        [
            [0, 1, 0, 0],
            [0, 0, 1, 0],
            [alpha1, 0, 0, alpha2],
            [alpha2, 0, 0, -alpha1],
        ]
    )


def product_basis() -> FourOutcomePovm:
    """|01>, |10>, |11>, |00>."""
    return povm_from_vectors(
        [
            [0, 1, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [1, 0, 0, 0],
        ]
    )


def two_param_basis(alpha2: float, alpha4: float) -> FourOutcomePovm:
    """
    a1|01> + a2|10>, a2|01> - a1|10>, a3|00> + a4|11>, a4|00> - a3|11>.

    a1 = sqrt(1 - a2^2) and a3 = sqrt(1 - a4^2). The fourth vector is the
    orthogonal complement of the third inside span{|00>, |11>}.
    """
    alpha2, alpha4 = float(alpha2), float(alpha4)
    for name, value in (("alpha2", alpha2), ("alpha4", alpha4)):
        if not 0.0 <= value <= 1.0:
            raise ParameterRangeError(f"{name} must lie in [0, 1], got {value}")
    alpha1 = np.sqrt(1.0 - alpha2 ** 2)
    alpha3 = np.sqrt(1.0 - alpha4 ** 2)
    return povm_from_vectors(
        [
            [0, alpha1, alpha2, 0],
            [0, alpha2, -alpha1, 0],
            [alpha3, 0, 0, alpha4],
            [alpha4, 0, 0, -alpha3],
        ]
    )


def inefficient_povm(basis: FourOutcomePovm, p4: float) -> FourOutcomePovm:
    """Each element E -> p4*E + (1-p4)/4 * I."""
    p4 = float(p4)
    if not 0.0 <= p4 <= 1.0:
        raise ParameterRangeError(f"Detection efficiency must lie in [0, 1], got {p4}")
    noisy = p4 * basis.elements + (1.0 - p4) / 4.0 * IDENTITY_4[np.newaxis, :, :]
    return FourOutcomePovm(noisy)


def make_povm(spec: PovmSpec) -> FourOutcomePovm:
    """Build the measurement described by a PovmSpec."""
    if spec.kind == PovmKind.ENTANGLED:
        alpha1 = spec.alpha1 if spec.alpha1 is not None else float(np.sqrt(1.0 - spec.alpha2 ** 2))
        basis = entangled_basis(alpha1)
    elif spec.kind == PovmKind.PRODUCT:
        basis = product_basis()
    elif spec.kind == PovmKind.TWO_PARAM:
        basis = two_param_basis(spec.alpha2, spec.alpha4)
    else:
        raise InvalidPovmError(f"Unsupported measurement kind {spec.kind!r}")
    if spec.efficiency < 1.0:
        return inefficient_povm(basis, spec.efficiency)
    return basis
