"""
Sign functions, correlators and the n-local inequality family.

A sign function sigma(s, o) = (-1)^f(s, o) is stored as a 2x4 table of +1/-1
indexed by the exponent bit s and the outcome index o = 2*r1 + r2. Only the
parity of the integer-valued f matters, so each slot has 2^8 choices.

For a distinguished party t the two inequality terms are

    I_j = 2^-(n-1) * E[ prod_{s != t} (sigma_s(0) + (-1)^j sigma_s(1)) * sigma_t(j-1) ]

for j = 1, 2, and the value compared against 1 is sqrt|I_1| + sqrt|I_2|.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from config import VIOLATION_TOL
from errors import InvalidNetworkError, PartyIndexError, UnknownSignFunctionError
from linalg_core import DensityMatrix, correlation_singular_values
from network import ProbabilityTable
from schemas import SignsSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignFunction:
    """Eight signs, written s=0 row then s=1 row, outcomes 00, 01, 10, 11."""

    code: str

    def __post_init__(self) -> None:
        if len(self.code) != 8 or set(self.code) - {"+", "-"}:
            raise UnknownSignFunctionError(f"Sign string must be 8 characters of '+'/'-', got {self.code!r}")

    @cached_property
    def table(self) -> np.ndarray:
        """Array of shape (2, 4) with entries +1/-1."""
        flat = np.array([1 if c == "+" else -1 for c in self.code], dtype=int)
        return flat.reshape(2, 4)

    @classmethod
    def from_string(cls, code: str) -> "SignFunction":
        return cls(code.strip())

    @classmethod
    def from_table(cls, table: np.ndarray) -> "SignFunction":
        flat = np.asarray(table).reshape(-1)
        return cls("".join("+" if x > 0 else "-" for x in flat))

    @classmethod
    def from_function(cls, func: Callable[[int, int, int], int]) -> "SignFunction":
        """Parity of an integer-valued f(s, r1, r2)."""
        return cls("".join("+" if func(s, r1, r2) % 2 == 0 else "-" for s, r1, r2 in product((0, 1), repeat=3)))

    def to_string(self) -> str:
        return self.code

    def value(self, s: int, r1: int, r2: int) -> int:
        return int(self.table[s, 2 * r1 + r2])

    def negated(self) -> "SignFunction":
        return SignFunction.from_table(-self.table)

    def row_flipped(self, s: int) -> "SignFunction":
        """Negate the s-th row only."""
        table = self.table.copy()
        table[s] *= -1
        return SignFunction.from_table(table)


_NAMED_FUNCTIONS: Dict[str, Callable[[int, int, int], int]] = {
    "F11": lambda s, r1, r2: (1 - s) * r1 + s * (r2 + 1),
    "H11": lambda s, r1, r2: (1 - s) * abs(r1 + r2 - 1) + s * abs(r1 * r2 - 1),
    "F17": lambda s, r1, r2: (1 - s) * abs(r1 + r2 - 1) + s * abs(r1 * r2 - 1),
    "F40": lambda s, r1, r2: 1 if s == 1 and r1 * r2 == 0 else 0,
}

SIGN_PRESETS: Dict[str, Tuple[str, ...]] = {
    "triangle-entangled": ("F11", "F11", "H11"),
    "triangle-product": ("F17", "F11", "F11"),
    "triangle-depolarizing": ("F40", "H11", "H11"),
    "square": ("H11", "F11", "F11", "H11"),
}


def named_sign_function(name: str) -> SignFunction:
    """One of F11, H11, F17, F40."""
    key = name.strip().upper()
    if key not in _NAMED_FUNCTIONS:
        raise UnknownSignFunctionError(f"Unknown sign function {name!r}; expected one of {sorted(_NAMED_FUNCTIONS)}")
    return SignFunction.from_function(_NAMED_FUNCTIONS[key])


def named_sign_functions() -> List[str]:
    return sorted(_NAMED_FUNCTIONS)


def parse_sign_function(token: str) -> SignFunction:
    """A name or an 8-character sign string."""
    token = token.strip()
    if token and set(token) <= {"+", "-"}:
        return SignFunction.from_string(token)
    return named_sign_function(token)


def resolve_signs(spec: SignsSpec, n: int) -> List[SignFunction]:
    """One sign function per party from a SignsSpec."""
    if spec.preset is not None:
        if spec.preset not in SIGN_PRESETS:
            raise UnknownSignFunctionError(f"Unknown sign preset {spec.preset!r}; expected one of {sorted(SIGN_PRESETS)}")
        tokens: Sequence[str] = SIGN_PRESETS[spec.preset]
    elif spec.functions is not None:
        tokens = spec.functions
    else:
        tokens = (spec.f, spec.g, spec.h)
    if len(tokens) != n:
        raise InvalidNetworkError(f"Got {len(tokens)} sign functions for {n} parties")
    return [parse_sign_function(tok) for tok in tokens]


def random_sign_function(rng: np.random.Generator) -> SignFunction:
    return SignFunction.from_table(np.where(rng.integers(0, 2, size=8) == 0, 1, -1))


@dataclass(frozen=True)
class InequalityResult:
    """I1, I2, sqrt|I1| + sqrt|I2| and whether it exceeds 1."""

    i1: float
    i2: float
    s_value: float
    violated: bool

    @classmethod
    def from_terms(cls, i1: float, i2: float) -> "InequalityResult":
        s_value = float(np.sqrt(abs(i1)) + np.sqrt(abs(i2)))
        return cls(i1=float(i1), i2=float(i2), s_value=s_value, violated=s_value > 1.0 + VIOLATION_TOL)


def _require_triangle(table: ProbabilityTable) -> None:
    if table.n != 3:
        raise InvalidNetworkError(f"Triangle inequality needs n=3, got n={table.n}")


def correlator(
    table: ProbabilityTable,
    f: SignFunction,
    g: SignFunction,
    h: SignFunction,
    i: int,
    j: int,
    k: int,
) -> float:
    """Sum over outcomes of f(i, o1) g(j, o2) h(k, o3) p(o1, o2, o3)."""
    _require_triangle(table)
    return float(np.einsum("abc,a,b,c->", table.probs, f.table[i], g.table[j], h.table[k]))


def evaluate_trilocal(
    table: ProbabilityTable, f: SignFunction, g: SignFunction, h: SignFunction
) -> InequalityResult:
    """I_j = 1/4 * sum_{i,k} (-1)^(j(i+k)) <C1^i C2^(j-1) C3^k>."""
    _require_triangle(table)
    terms = []
    for j in (1, 2):
        total = sum(
            (-1) ** (j * (i + k)) * correlator(table, f, g, h, i, j - 1, k)
            for i in (0, 1)
            for k in (0, 1)
        )
        terms.append(total / 4.0)
    result = InequalityResult.from_terms(*terms)
    logger.debug("Trilocal %s/%s/%s -> s=%.12g", f.code, g.code, h.code, result.s_value)
    return result


def evaluate_ngon(table: ProbabilityTable, fs: Sequence[SignFunction], t: int) -> InequalityResult:
    """
    Inequality terms for an n-gon with distinguished party t (1-based).

    The sum over the exponent bits of the other parties factorizes into one
    vector per party, contracted against the table.
    """
    n = table.n
    if len(fs) != n:
        raise InvalidNetworkError(f"Got {len(fs)} sign functions for {n} parties")
    if not 1 <= t <= n:
        raise PartyIndexError(f"Distinguished party t={t} must lie in [1, {n}]")
    terms = []
    for j in (1, 2):
        operands: List[object] = [table.probs, list(range(n))]
        for p, sign in enumerate(fs):
            if p == t - 1:
                vec = sign.table[j - 1].astype(float)
            else:
                vec = (sign.table[0] + (-1) ** j * sign.table[1]).astype(float)
            operands.extend([vec, [p]])
        operands.append([])
        terms.append(float(np.einsum(*operands)) / 2.0 ** (n - 1))
    return InequalityResult.from_terms(*terms)


def evaluate_table(table: ProbabilityTable, fs: Sequence[SignFunction], t: int = 2) -> InequalityResult:
    """Literal trilocal sum for the standard triangle, factorized form otherwise."""
    if table.n == 3 and t == 2:
        return evaluate_trilocal(table, *fs)
    return evaluate_ngon(table, fs, t)


def mix_with_uniform(table: ProbabilityTable, q: float) -> ProbabilityTable:
    """q*p + (1-q)/4^n."""
    return ProbabilityTable(q * table.probs + (1.0 - q) * 4.0 ** -table.n)


def linear_nlocal_value(states: Sequence[DensityMatrix]) -> float:
    """sqrt(prod t11 + prod t22) over the sources of a linear chain."""
    if not states:
        raise InvalidNetworkError("Linear chain needs at least one source")
    triples = [correlation_singular_values(rho) for rho in states]
    first = float(np.prod([tr.t11 for tr in triples]))
    second = float(np.prod([tr.t22 for tr in triples]))
    return float(np.sqrt(first + second))


@dataclass(frozen=True)
class SignSearchResult:
    """Best sign triple for a triangle table."""

    functions: Tuple[SignFunction, SignFunction, SignFunction]
    result: InequalityResult

    @property
    def signs(self) -> List[str]:
        return [fn.code for fn in self.functions]


def _all_sign_tables(canonical: bool) -> np.ndarray:
    """All 2x4 sign tables; with canonical=True only those starting with '+'."""
    bits = np.array(list(product((1, -1), repeat=8)), dtype=float)
    if canonical:
        bits = bits[bits[:, 0] > 0]
    return bits.reshape(-1, 2, 4)


def search_signs(table: ProbabilityTable) -> SignSearchResult:
    """
    Exact maximum of s_value over all 2^24 triangle sign triples.

    Negating an outer function leaves |I1| and |I2| unchanged, so outer
    tables are enumerated up to a global flip. For fixed outer functions the
    middle function enters I1 only through its s=0 row and I2 only through
    its s=1 row, so each row is chosen outcome by outcome.
    """
    _require_triangle(table)
    outer = _all_sign_tables(canonical=True)
    diff = outer[:, 0, :] - outer[:, 1, :]
    summ = outer[:, 0, :] + outer[:, 1, :]
    a1 = np.einsum("abc,fa,hc->fhb", table.probs, diff, diff, optimize=True)
    a2 = np.einsum("abc,fa,hc->fhb", table.probs, summ, summ, optimize=True)
    best = np.sqrt(np.abs(a1).sum(axis=2) / 4.0) + np.sqrt(np.abs(a2).sum(axis=2) / 4.0)
    fi, hi = np.unravel_index(int(np.argmax(best)), best.shape)
    g_table = np.vstack([np.where(a1[fi, hi] >= 0, 1, -1), np.where(a2[fi, hi] >= 0, 1, -1)])
    f = SignFunction.from_table(outer[fi])
    g = SignFunction.from_table(g_table)
    h = SignFunction.from_table(outer[hi])
    result = evaluate_trilocal(table, f, g, h)
    logger.info("Sign search best %s/%s/%s s=%.10g", f.code, g.code, h.code, result.s_value)
    return SignSearchResult(functions=(f, g, h), result=result)
