"""
Pydantic schemas for request validation and response serialization.

Covers the JSON network-spec (sources, POVMs, sign functions, parameters),
the scanner requests built on top of it, and the response shapes returned by
the HTTP API and the CLI JSON summaries.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from config import MAX_PARTIES, MIN_PARTIES, SCHMIDT_TOL, WEIGHT_TOL


class StateKind(str, Enum):
    """Source-state families."""

    BELL = "bell"
    SCHMIDT = "schmidt"
    SEPARABLE_CC = "separable_cc"
    PRODUCT = "product"
    BELL_DIAGONAL = "bell_diagonal"
    NOISY_GATE = "noisy_gate"
    DEPOLARIZED_BELL = "depolarized_bell"


class BellLabel(str, Enum):
    """The four Bell states."""

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class PovmKind(str, Enum):
    """Four-outcome joint measurements available to a party."""

    ENTANGLED = "entangled"
    PRODUCT = "product"
    TWO_PARAM = "two_param"


class StateSpec(BaseModel):
    """One source state. Only the fields of the chosen kind are read."""

    kind: StateKind = Field(..., description="State family")
    label: Optional[BellLabel] = Field(None, description="Bell state label (kind=bell)")
    tau1: Optional[float] = Field(None, ge=-1, le=1, description="Coefficient of |00> (kind=schmidt)")
    tau2: Optional[float] = Field(
        None, ge=-1, le=1, description="Coefficient of |11>; derived from tau1 when omitted"
    )
    u: Optional[List[float]] = Field(None, min_length=3, max_length=3, description="Bloch vector of qubit 0")
    v: Optional[List[float]] = Field(None, min_length=3, max_length=3, description="Bloch vector of qubit 1")
    weights: Optional[List[float]] = Field(
        None, min_length=3, max_length=4, description="Weights of psi-, phi+, phi-, psi+ (4th optional)"
    )
    p1: Optional[float] = Field(None, ge=0, le=1, description="Hadamard fidelity (kind=noisy_gate)")
    p2: Optional[float] = Field(None, ge=0, le=1, description="CNOT fidelity (kind=noisy_gate)")
    p3: Optional[float] = Field(None, ge=0, le=1, description="Depolarizing visibility (kind=depolarized_bell)")

    @model_validator(mode="after")
    def check_kind_fields(self) -> "StateSpec":
        """Require the parameters of the selected kind."""
        required = {
            StateKind.BELL: ("label",),
            StateKind.SCHMIDT: ("tau1",),
            StateKind.PRODUCT: ("u", "v"),
            StateKind.BELL_DIAGONAL: ("weights",),
            StateKind.NOISY_GATE: ("p1", "p2"),
            StateKind.DEPOLARIZED_BELL: ("p3",),
        }.get(self.kind, ())
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"State kind '{self.kind.value}' requires {', '.join(missing)}")
        if self.kind == StateKind.SCHMIDT and self.tau2 is not None:
            if abs(self.tau1 ** 2 + self.tau2 ** 2 - 1.0) > SCHMIDT_TOL:
                raise ValueError("tau1^2 + tau2^2 must equal 1")
        if self.kind == StateKind.BELL_DIAGONAL:
            total = sum(self.weights)
            if any(w < 0 or w > 1 for w in self.weights):
                raise ValueError("Bell-diagonal weights must lie in [0, 1]")
            if len(self.weights) == 4 and abs(total - 1.0) > WEIGHT_TOL:
                raise ValueError("Bell-diagonal weights must sum to 1")
            if len(self.weights) == 3 and total > 1.0 + WEIGHT_TOL:
                raise ValueError("Three Bell-diagonal weights must sum to at most 1")
        return self


class PovmSpec(BaseModel):
    """One party's measurement, optionally with finite detection efficiency."""

    kind: PovmKind = Field(..., description="Measurement basis")
    alpha1: Optional[float] = Field(None, gt=0, lt=1, description="Entangled-basis parameter")
    alpha2: Optional[float] = Field(
        None, ge=0, le=1, description="Two-parameter basis, first pair; entangled basis sqrt(1 - alpha1^2)"
    )
    alpha4: Optional[float] = Field(None, ge=0, le=1, description="Two-parameter basis, second pair")
    efficiency: float = Field(default=1.0, ge=0, le=1, description="Detection efficiency p4")

    @model_validator(mode="after")
    def check_kind_fields(self) -> "PovmSpec":
        """Require the parameters of the selected basis."""
        if self.kind == PovmKind.ENTANGLED:
            if self.alpha1 is None and self.alpha2 is None:
                raise ValueError("Entangled basis requires alpha1 or alpha2")
            if self.alpha1 is None and not 0 < self.alpha2 < 1:
                raise ValueError("Entangled basis needs 0 < alpha2 < 1")
        if self.kind == PovmKind.TWO_PARAM and (self.alpha2 is None or self.alpha4 is None):
            raise ValueError("Two-parameter basis requires alpha2 and alpha4")
        return self


def _check_sign_token(token: str) -> str:
    token = token.strip()
    if token and set(token) <= {"+", "-"}:
        if len(token) != 8:
            raise ValueError(f"Sign string {token!r} must have exactly 8 characters")
        return token
    return token.upper()


class SignsSpec(BaseModel):
    """
    Sign functions for the inequality.

    Exactly one form: a preset name, an (f, g, h) triple, or a list with one
    entry per party. Each entry is a name (F11, H11, F17, F40) or an
    8-character '+'/'-' string.
    """

    preset: Optional[str] = Field(None, description="Named triple or quadruple")
    f: Optional[str] = None
    g: Optional[str] = None
    h: Optional[str] = None
    functions: Optional[List[str]] = Field(None, description="One sign function per party")

    @field_validator("f", "g", "h")
    @classmethod
    def check_token(cls, v: Optional[str]) -> Optional[str]:
        """Normalize names and check string length."""
        return None if v is None else _check_sign_token(v)

    @field_validator("functions")
    @classmethod
    def check_tokens(cls, v: Optional[List[str]]) -> Optional[List[str]]:
        """Normalize every entry."""
        return None if v is None else [_check_sign_token(token) for token in v]

    @model_validator(mode="after")
    def check_single_form(self) -> "SignsSpec":
        """Exactly one of preset, triple or list."""
        triple = [self.f, self.g, self.h]
        forms = [
            self.preset is not None,
            any(x is not None for x in triple),
            self.functions is not None,
        ]
        if sum(forms) != 1:
            raise ValueError("Give exactly one of preset, f/g/h or functions")
        if forms[1] and any(x is None for x in triple):
            raise ValueError("A sign triple needs all of f, g and h")
        return self


class NetworkSpecModel(BaseModel):
    """The JSON network-spec."""

    n: int = Field(..., ge=MIN_PARTIES, le=MAX_PARTIES, description="Number of parties and sources")
    sources: List[StateSpec] = Field(..., description="Source i feeds parties i and i+1 (mod n)")
    povms: List[PovmSpec] = Field(..., description="One measurement per party")
    signs: Optional[SignsSpec] = Field(None, description="Sign functions; required for evaluation")
    params: Dict[str, float] = Field(default_factory=dict, description="Values for $name placeholders")
    t: int = Field(default=2, ge=1, description="Distinguished party, 1-based")

    @model_validator(mode="after")
    def check_lengths(self) -> "NetworkSpecModel":
        """Source and POVM lists match n; t is a party."""
        if len(self.sources) != self.n:
            raise ValueError(f"Expected {self.n} sources, got {len(self.sources)}")
        if len(self.povms) != self.n:
            raise ValueError(f"Expected {self.n} povms, got {len(self.povms)}")
        if self.t > self.n:
            raise ValueError(f"Distinguished party t={self.t} exceeds n={self.n}")
        return self


class SweepAxis(BaseModel):
    """One swept parameter."""

    name: str = Field(..., min_length=1)
    lo: float
    hi: float
    steps: int = Field(..., ge=2)

    @model_validator(mode="after")
    def check_range(self) -> "SweepAxis":
        """lo must be below hi."""
        if not self.lo < self.hi:
            raise ValueError(f"Axis '{self.name}' needs lo < hi, got [{self.lo}, {self.hi}]")
        return self


class SweepSpec(BaseModel):
    """Grid evaluation of a network template."""

    network: Dict[str, Any] = Field(..., description="Network-spec template with $name placeholders")
    axes: List[SweepAxis] = Field(..., min_length=1)
    search_signs: bool = Field(default=False, description="Use the best sign triple at every cell")


class ThresholdRequest(BaseModel):
    """Crossing of s_value = 1 along one parameter."""

    network: Dict[str, Any]
    parameter: str = Field(..., min_length=1)
    lo: float
    hi: float
    xtol: float = Field(default=1e-5, gt=0)

    @model_validator(mode="after")
    def check_bracket(self) -> "ThresholdRequest":
        """lo must be below hi."""
        if not self.lo < self.hi:
            raise ValueError("Bracket needs lo < hi")
        return self


class MaximizeRequest(BaseModel):
    """Maximize a catalogued quantity or a template's s_value over a box."""

    quantity: Optional[str] = Field(None, description="Catalogued quantity id")
    network: Optional[Dict[str, Any]] = Field(None, description="Template whose s_value is maximized")
    box: Dict[str, List[float]] = Field(default_factory=dict, description="name -> [lo, hi]")
    points_per_axis: int = Field(default=21, ge=2)

    @model_validator(mode="after")
    def check_target(self) -> "MaximizeRequest":
        """Exactly one of quantity or network."""
        if (self.quantity is None) == (self.network is None):
            raise ValueError("Give exactly one of quantity or network")
        if self.network is not None and not self.box:
            raise ValueError("A network template needs a parameter box")
        for name, bounds in self.box.items():
            if len(bounds) != 2:
                raise ValueError(f"Box entry '{name}' must be [lo, hi]")
        return self


class DiscrepancyRequest(BaseModel):
    """Printed-polynomial comparison over a grid."""

    targets: Optional[List[str]] = Field(None, description="Target ids; all when omitted")
    grid: int = Field(default=11, ge=2, le=201)


class EntanglementRequest(BaseModel):
    """Three pure sources measured in a common basis."""

    sources: List[StateSpec] = Field(..., min_length=3, max_length=3)
    povm: PovmSpec
    signs: Optional[SignsSpec] = Field(None, description="Defaults to the triangle-product preset")


class CompareLinearRequest(BaseModel):
    """Triangle versus linear-chain detection for three sources."""

    network: NetworkSpecModel

    @field_validator("network")
    @classmethod
    def check_triangle(cls, v: NetworkSpecModel) -> NetworkSpecModel:
        """Only triangles have a linear-chain counterpart here."""
        if v.n != 3:
            raise ValueError("compare-linear needs n = 3")
        if v.signs is None:
            raise ValueError("compare-linear needs sign functions")
        return v


class LhvTestRequest(BaseModel):
    """Random hidden-variable models checked against the inequality."""

    n: int = Field(default=3, ge=MIN_PARTIES, le=MAX_PARTIES)
    models: int = Field(default=100, ge=1)
    triples: int = Field(default=20, ge=1, description="Random sign functions per model")
    max_cardinality: int = Field(default=4, ge=1, le=8)
    seed: int = Field(default=0, ge=0)
    trivial_sources: List[int] = Field(default_factory=list, description="0-based sources forced to cardinality 1")


class InequalityResultResponse(BaseModel):
    """I1, I2 and the combined value."""

    i1: float
    i2: float
    s_value: float
    violated: bool

    model_config = {"from_attributes": True}


class DistributionRow(BaseModel):
    """One outcome tuple and its probability."""

    outcomes: List[int]
    probability: float


class EvaluationResponse(BaseModel):
    """Result of evaluating one network."""

    n: int
    t: int
    signs: List[str]
    result: InequalityResultResponse
    table: Optional[List[DistributionRow]] = Field(None, description="Joint distribution when requested")

    model_config = {"from_attributes": True}


class SignSearchResponse(BaseModel):
    """Best sign triple found for a triangle."""

    signs: List[str]
    result: InequalityResultResponse

    model_config = {"from_attributes": True}


class SignFunctionResponse(BaseModel):
    """A named sign function."""

    name: str
    signs: str
    table: List[List[int]]


class SweepRowResponse(BaseModel):
    """One sweep cell."""

    params: Dict[str, float]
    i1: float
    i2: float
    s_value: float
    violated: bool

    model_config = {"from_attributes": True}


class ThresholdResponse(BaseModel):
    """Crossing point of s_value = 1."""

    parameter: str
    value: float
    lo: float
    hi: float

    model_config = {"from_attributes": True}


class MaximizeResponse(BaseModel):
    """Best value found and where."""

    quantity: str
    value: float
    argmax: Dict[str, float]
    grid_best: float
    evaluations: int

    model_config = {"from_attributes": True}


class DiscrepancyRecordResponse(BaseModel):
    """Printed versus recomputed value at one point."""

    target: str
    point: Dict[str, float]
    printed_value: float
    first_principles_value: float
    gap: float

    model_config = {"from_attributes": True}


class DiscrepancyReportResponse(BaseModel):
    """Per-target summary."""

    target: str
    scale: float
    residual: float
    known: bool
    passed: bool
    worst: List[DiscrepancyRecordResponse]

    model_config = {"from_attributes": True}


class EntanglementResponse(BaseModel):
    """Verdict of the entanglement workflow."""

    verdict: str
    result: InequalityResultResponse

    model_config = {"from_attributes": True}


class LinearComparisonResponse(BaseModel):
    """Triangle versus linear-chain values."""

    triangle_s: float
    linear_value: float
    triangle_only: bool

    model_config = {"from_attributes": True}


class LhvSuiteResponse(BaseModel):
    """Summary of a hidden-variable suite."""

    n: int
    models: int
    evaluations: int
    max_s_value: float
    failures: int

    model_config = {"from_attributes": True}
