"""
Source-state families for polygon networks.

Every constructor returns a validated two-qubit DensityMatrix. Noise channels
are built as explicit operator compositions on top of the linalg_core helpers.
"""

import logging
from typing import Dict, Optional, Sequence

import numpy as np

from config import BLOCH_NORM_SLACK, SCHMIDT_TOL, WEIGHT_TOL
from errors import ParameterRangeError
from linalg_core import (
    IDENTITY_2,
    IDENTITY_4,
    PAULIS,
    DensityMatrix,
    kron,
    ket_to_density,
    partial_trace,
)
from schemas import StateKind, StateSpec

logger = logging.getLogger(__name__)

_SQRT_HALF = 1.0 / np.sqrt(2.0)

BELL_KETS: Dict[str, np.ndarray] = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) * _SQRT_HALF,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) * _SQRT_HALF,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) * _SQRT_HALF,
    "psi-": np.array([0, 1, -1, 0], dtype=complex) * _SQRT_HALF,
}

# Order of the Bell-diagonal weights.
BELL_DIAGONAL_ORDER = ("psi-", "phi+", "phi-", "psi+")

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ParameterRangeError(f"{name} must lie in [0, 1], got {value}")
    return value


def bell_state(label: str) -> DensityMatrix:
    """One of phi+, phi-, psi+, psi-."""
    key = getattr(label, "value", label)
    if key not in BELL_KETS:
        raise ParameterRangeError(f"Unknown Bell state {label!r}; expected one of {sorted(BELL_KETS)}")
    return ket_to_density(BELL_KETS[key])


def schmidt_state(tau1: float, tau2: Optional[float] = None) -> DensityMatrix:
    """
    tau1|00> + tau2|11>.

    tau2 defaults to sqrt(1 - tau1^2); an explicit pair must be normalized.
    """
    tau1 = float(tau1)
    if tau2 is None:
        if abs(tau1) > 1.0:
            raise ParameterRangeError(f"|tau1| must be <= 1, got {tau1}")
        tau2 = float(np.sqrt(1.0 - tau1 ** 2))
    tau2 = float(tau2)
    if abs(tau1 ** 2 + tau2 ** 2 - 1.0) > SCHMIDT_TOL:
        raise ParameterRangeError(f"Schmidt coefficients ({tau1}, {tau2}) are not normalized")
    return ket_to_density([tau1, 0.0, 0.0, tau2])


def separable_cc_state() -> DensityMatrix:
    """Classically correlated (|00><00| + |11><11|)/2."""
    return DensityMatrix(np.diag([0.5, 0.0, 0.0, 0.5]))


def _qubit_from_bloch(vec: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ParameterRangeError(f"Bloch vector {name} must have 3 components, got {arr.shape[0]}")
    if np.linalg.norm(arr) > 1.0 + BLOCH_NORM_SLACK:
        raise ParameterRangeError(f"Bloch vector {name} has norm {np.linalg.norm(arr):.6g} > 1")
    return (IDENTITY_2 + sum(c * s for c, s in zip(arr, PAULIS))) / 2.0


def product_state(u: Sequence[float], v: Sequence[float]) -> DensityMatrix:
    """(I + u.sigma)/2 x (I + v.sigma)/2."""
    return DensityMatrix(kron(_qubit_from_bloch(u, "u"), _qubit_from_bloch(v, "v")))


def bell_diagonal_state(weights: Sequence[float]) -> DensityMatrix:
    """
    Mixture of psi-, phi+, phi-, psi+ with the given weights.

    Three weights may be given; the fourth is then 1 minus their sum.
    """
    w = [float(x) for x in weights]
    if len(w) == 3:
        w.append(1.0 - sum(w))
    if len(w) != 4:
        raise ParameterRangeError(f"Bell-diagonal state needs 3 or 4 weights, got {len(w)}")
    if any(x < -WEIGHT_TOL or x > 1.0 + WEIGHT_TOL for x in w):
        raise ParameterRangeError(f"Bell-diagonal weights must lie in [0, 1], got {w}")
    if abs(sum(w) - 1.0) > WEIGHT_TOL:
        raise ParameterRangeError(f"Bell-diagonal weights sum to {sum(w):.12g}, expected 1")
    mat = sum(
        max(x, 0.0) * np.outer(BELL_KETS[label], BELL_KETS[label].conj())
        for x, label in zip(w, BELL_DIAGONAL_ORDER)
    )
    return DensityMatrix(mat)


def depolarize(rho: DensityMatrix, p: float) -> DensityMatrix:
    """p*rho + (1-p)*I/d on the whole state."""
    p = _check_probability("p", p)
    mixed = p * rho.matrix + (1.0 - p) * np.eye(rho.dim) / rho.dim
    return DensityMatrix(mixed, check=False)


def noisy_hadamard(rho: DensityMatrix, p1: float) -> DensityMatrix:
    """Hadamard on qubit 0 with probability p1, else qubit 0 is replaced by I/2."""
    p1 = _check_probability("p1", p1)
    gate = kron(HADAMARD, IDENTITY_2)
    coherent = gate @ rho.matrix @ gate.conj().T
    reset = kron(IDENTITY_2, partial_trace(rho, [1]).matrix)
    return DensityMatrix(p1 * coherent + (1.0 - p1) / 2.0 * reset, check=False)


def noisy_cnot(rho: DensityMatrix, p2: float) -> DensityMatrix:
    """CNOT (control qubit 0) with probability p2, else the fully mixed state."""
    p2 = _check_probability("p2", p2)
    coherent = CNOT @ rho.matrix @ CNOT.conj().T
    return DensityMatrix(p2 * coherent + (1.0 - p2) / 4.0 * IDENTITY_4, check=False)


def noisy_gate_state(p1: float, p2: float) -> DensityMatrix:
    """|10><10| through the noisy Hadamard then the noisy CNOT; phi- when p1 = p2 = 1."""
    start = ket_to_density([0, 0, 1, 0])
    return noisy_cnot(noisy_hadamard(start, p1), p2)


def depolarize_bell(p3: float) -> DensityMatrix:
    """p3 |phi-><phi-| + (1-p3) I/4."""
    return depolarize(bell_state("phi-"), p3)


def make_state(spec: StateSpec) -> DensityMatrix:
    """Build the two-qubit state described by a StateSpec."""
    kind = spec.kind
    if kind == StateKind.BELL:
        return bell_state(spec.label)
    if kind == StateKind.SCHMIDT:
        return schmidt_state(spec.tau1, spec.tau2)
    if kind == StateKind.SEPARABLE_CC:
        return separable_cc_state()
    if kind == StateKind.PRODUCT:
        return product_state(spec.u, spec.v)
    if kind == StateKind.BELL_DIAGONAL:
        return bell_diagonal_state(spec.weights)
    if kind == StateKind.NOISY_GATE:
        return noisy_gate_state(spec.p1, spec.p2)
    if kind == StateKind.DEPOLARIZED_BELL:
        return depolarize_bell(spec.p3)
    raise ParameterRangeError(f"Unsupported state kind {kind!r}")
