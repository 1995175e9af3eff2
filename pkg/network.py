"""
Polygon networks: wiring, global state and exact joint distributions.

Source s (0-based) sits between parties s and s+1 (mod n). Each source's
first qubit goes to the lower-labeled of its two parties, and every party
holds its qubits in the order (qubit from source p-1, qubit from source p).
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from config import MAX_PARTIES, MIN_PARTIES, NORMALIZATION_TOL, PROBABILITY_FLOOR
from errors import InvalidNetworkError
from linalg_core import DensityMatrix, multikron, partial_trace, permute_qubits
from measurements import FourOutcomePovm, make_povm
from schemas import NetworkSpecModel
from states import make_state

logger = logging.getLogger(__name__)

# (source index, slot within the source's pair)
Wire = Tuple[int, int]


def party_wires(n: int) -> List[Tuple[Wire, Wire]]:
    """Local (first, second) qubits of every party as (source, slot) pairs."""
    _check_party_count(n)
    wires = []
    for p in range(n):
        first = (n - 1, 0) if p == 0 else (p - 1, 1)
        second = (n - 1, 1) if p == n - 1 else (p, 0)
        wires.append((first, second))
    return wires


def wiring_permutation(n: int) -> List[int]:
    """
    Qubit permutation from source order to party order.

    Output qubit 2p+j is the j-th local qubit of party p; input qubit 2s+q is
    slot q of source s.
    """
    return [2 * s + q for pair in party_wires(n) for (s, q) in pair]


def _check_party_count(n: int) -> None:
    if not MIN_PARTIES <= n <= MAX_PARTIES:
        raise InvalidNetworkError(f"Party count must lie in [{MIN_PARTIES}, {MAX_PARTIES}], got {n}")


@dataclass(frozen=True)
class NetworkSpec:
    """n sources (two-qubit states) and n party measurements."""

    n: int
    sources: Tuple[DensityMatrix, ...]
    povms: Tuple[FourOutcomePovm, ...]

    def __post_init__(self) -> None:
        _check_party_count(self.n)
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "povms", tuple(self.povms))
        if len(self.sources) != self.n or len(self.povms) != self.n:
            raise InvalidNetworkError(
                f"Network with n={self.n} got {len(self.sources)} sources and {len(self.povms)} povms"
            )
        for s, rho in enumerate(self.sources):
            if rho.qubit_count != 2:
                raise InvalidNetworkError(f"Source {s} is not a two-qubit state")


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """p(o_1, ..., o_n), axis p holding party p's outcome index 2*o1 + o2."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.probs, dtype=float)
        n = arr.ndim
        if n < 1 or arr.shape != (4,) * n:
            raise InvalidNetworkError(f"Probability table must have shape (4,)*n, got {arr.shape}")
        lowest = float(arr.min())
        if lowest < PROBABILITY_FLOOR:
            raise InvalidNetworkError(f"Probability table has negative entry {lowest:.3e}")
        if lowest < 0.0:
            logger.warning("Clamping probabilities down to %.3e to 0", lowest)
            arr = np.where(arr < 0.0, 0.0, arr)
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidNetworkError(f"Probability table sums to {total:.12g}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n(self) -> int:
        return self.probs.ndim

    def marginal(self, party: int) -> np.ndarray:
        """Outcome distribution of one party (0-based)."""
        if not 0 <= party < self.n:
            raise InvalidNetworkError(f"Party {party} out of range for n={self.n}")
        others = tuple(ax for ax in range(self.n) if ax != party)
        return self.probs.sum(axis=others)

    def rotate(self, steps: int) -> "ProbabilityTable":
        """Table of the network whose party p is party p+steps of this one."""
        axes = [(p + steps) % self.n for p in range(self.n)]
        return ProbabilityTable(self.probs.transpose(axes))

    def factorizes(self, tol: float = 1e-10) -> bool:
        """True when the table equals the product of its single-party marginals."""
        prod = self.marginal(0)
        for p in range(1, self.n):
            prod = np.multiply.outer(prod, self.marginal(p))
        return bool(np.abs(prod - self.probs).max() <= tol)

    def rows(self) -> Iterator[Tuple[Tuple[int, ...], float]]:
        """(outcome indices, probability) in lexicographic order."""
        for outcomes in product(range(4), repeat=self.n):
            yield outcomes, float(self.probs[outcomes])


def uniform_table(n: int) -> ProbabilityTable:
    return ProbabilityTable(np.full((4,) * n, 4.0 ** -n))


def global_state(spec: NetworkSpec) -> DensityMatrix:
    """Tensor the sources and reorder qubits into party order."""
    stacked = DensityMatrix(multikron(*(rho.matrix for rho in spec.sources)), check=False)
    return permute_qubits(stacked, wiring_permutation(spec.n))


def party_state(spec: NetworkSpec, party: int) -> DensityMatrix:
    """Two-qubit reduced state on a party's wires."""
    (s0, q0), (s1, q1) = party_wires(spec.n)[party]
    first = partial_trace(spec.sources[s0], [q0])
    second = partial_trace(spec.sources[s1], [q1])
    return DensityMatrix(np.kron(first.matrix, second.matrix), check=False)


def joint_distribution(spec: NetworkSpec) -> ProbabilityTable:
    """
    Exact outcome distribution.

    Contracts the source tensors with the POVM tensors along the wiring
    instead of materializing the 4^n x 4^n global state.
    """
    n = spec.n
    operands: List[object] = []
    for s, rho in enumerate(spec.sources):
        operands.append(rho.matrix.reshape(2, 2, 2, 2))
        operands.append([2 * s, 2 * s + 1, 2 * n + 2 * s, 2 * n + 2 * s + 1])
    for p, (w0, w1) in enumerate(party_wires(n)):
        kets = [2 * s + q for s, q in (w0, w1)]
        bras = [2 * n + k for k in kets]
        operands.append(spec.povms[p].elements.reshape(4, 2, 2, 2, 2))
        operands.append([4 * n + p] + bras + kets)
    operands.append([4 * n + p for p in range(n)])
    raw = np.real(np.einsum(*operands, optimize="greedy"))
    logger.debug("Joint distribution for n=%d, min entry %.3e", n, raw.min())
    return ProbabilityTable(raw)


def rotate_network(spec: NetworkSpec, steps: int) -> NetworkSpec:
    """
    Relabel parties cyclically: new party p is old party p+steps.

    A source that moves onto or off the closing edge (between parties n-1 and
    0) has its qubits swapped, so each party keeps the same physical qubits.
    """
    n = spec.n
    sources = []
    for s in range(n):
        old = (s + steps) % n
        rho = spec.sources[old]
        if (s == n - 1) != (old == n - 1):
            rho = permute_qubits(rho, [1, 0])
        sources.append(rho)
    povms = [spec.povms[(p + steps) % n] for p in range(n)]
    return NetworkSpec(n=n, sources=tuple(sources), povms=tuple(povms))


def network_from_schema(model: NetworkSpecModel) -> NetworkSpec:
    """Build states and measurements from a validated network-spec."""
    return NetworkSpec(
        n=model.n,
        sources=tuple(make_state(src) for src in model.sources),
        povms=tuple(make_povm(povm) for povm in model.povms),
    )


def table_from_sequence(values: Sequence[float], n: int) -> ProbabilityTable:
    """Flat 4^n vector in lexicographic outcome order to a table."""
    return ProbabilityTable(np.asarray(values, dtype=float).reshape((4,) * n))
