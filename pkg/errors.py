"""
Exception hierarchy for polyloc.

Every invalid-input condition raised by the library derives from PolylocError,
which is itself a ValueError so callers that only expect ValueError keep working.
"""


class PolylocError(ValueError):
    """Base class for all polyloc errors."""


class ConfigurationError(PolylocError):
    """An environment variable or setting has an unusable value."""


class InvalidDensityMatrixError(PolylocError):
    """Matrix is not a valid multi-qubit density matrix."""


class QubitIndexError(PolylocError):
    """Qubit index list is out of range or repeats an index."""


class InvalidPermutationError(PolylocError):
    """Qubit permutation is not a bijection."""


class ParameterRangeError(PolylocError):
    """A state, measurement or noise parameter lies outside its domain."""


class InvalidPovmError(PolylocError):
    """Operators do not form a four-outcome POVM."""


class InvalidNetworkError(PolylocError):
    """Network description is inconsistent (party count, list lengths, dimensions)."""


class UnknownSignFunctionError(PolylocError):
    """Sign function name or string cannot be resolved."""


class PartyIndexError(PolylocError):
    """Distinguished party index is outside 1..n."""


class StateSpaceTooLargeError(PolylocError):
    """Hidden-variable state space exceeds the configured cap."""


class InvalidModelError(PolylocError):
    """Hidden-variable model violates its normalization invariants."""


class NoSignChangeError(PolylocError):
    """Bracket passed to a threshold search does not straddle the bound."""


class EmptyBoxError(PolylocError):
    """Parameter box for maximization is empty or degenerate."""


class MixedStateError(PolylocError):
    """A workflow that requires pure states received a mixed one."""


class UnresolvedParameterError(PolylocError):
    """A template placeholder has no value."""


class UnknownTargetError(PolylocError):
    """Discrepancy target or maximization quantity is not in the catalogue."""
