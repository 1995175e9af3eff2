"""
Finite hidden-variable models for polygon networks.

Source s carries lambda_s with distribution rho_s; party p answers from
(lambda_{p-1}, lambda_p), matching the quantum wiring. Exact distributions
come from a single einsum over all hidden-variable tuples.
"""

import json
import logging
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import (
    DETERMINISTIC_SWEEP_CAP,
    LHV_MAX_CARDINALITY,
    LHV_NORMALIZATION_TOL,
    LHV_STATE_SPACE_CAP,
    MAX_PARTIES,
    MIN_PARTIES,
    VIOLATION_TOL,
    get_executor,
)
from errors import InvalidModelError, StateSpaceTooLargeError
from inequalities import (
    InequalityResult,
    SignFunction,
    evaluate_table,
    random_sign_function,
)
from network import ProbabilityTable

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]


@dataclass(frozen=True, eq=False)
class LhvModel:
    """
    Source distributions and party response tables.

    responses[p] has shape (|Lambda_{p-1}|, |Lambda_p|, 4), indices mod n.
    """

    source_dists: Tuple[np.ndarray, ...]
    responses: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        dists = tuple(np.asarray(d, dtype=float) for d in self.source_dists)
        resps = tuple(np.asarray(r, dtype=float) for r in self.responses)
        n = len(dists)
        if not MIN_PARTIES <= n <= MAX_PARTIES or len(resps) != n:
            raise InvalidModelError(f"Model needs n in [{MIN_PARTIES}, {MAX_PARTIES}] sources and responses")
        for s, dist in enumerate(dists):
            if dist.ndim != 1 or dist.size < 1 or dist.min() < 0.0:
                raise InvalidModelError(f"Source {s} distribution is not a probability vector")
            if abs(dist.sum() - 1.0) > LHV_NORMALIZATION_TOL:
                raise InvalidModelError(f"Source {s} distribution sums to {dist.sum():.15g}")
        for p, resp in enumerate(resps):
            expected = (dists[(p - 1) % n].size, dists[p].size, 4)
            if resp.shape != expected:
                raise InvalidModelError(f"Party {p} responses have shape {resp.shape}, expected {expected}")
            if resp.min() < 0.0:
                raise InvalidModelError(f"Party {p} has a negative response probability")
            if np.abs(resp.sum(axis=2) - 1.0).max() > LHV_NORMALIZATION_TOL:
                raise InvalidModelError(f"Party {p} response rows do not sum to 1")
        object.__setattr__(self, "source_dists", dists)
        object.__setattr__(self, "responses", resps)

    @property
    def n(self) -> int:
        return len(self.source_dists)

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(d.size for d in self.source_dists)

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "source_dists": [d.tolist() for d in self.source_dists],
            "responses": [r.tolist() for r in self.responses],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "LhvModel":
        try:
            return cls(
                source_dists=tuple(np.asarray(d) for d in data["source_dists"]),
                responses=tuple(np.asarray(r) for r in data["responses"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidModelError(f"Malformed model description: {exc}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LhvModel":
        return cls.from_dict(json.loads(text))


def sample_model(
    n: int,
    max_cardinality: int,
    seed: Seed,
    trivial_sources: Iterable[int] = (),
) -> LhvModel:
    """
    Random model with Dirichlet(1, ..., 1) sources and responses.

    Cardinalities are uniform in [1, max_cardinality]; sources listed in
    trivial_sources get cardinality 1.
    """
    if not MIN_PARTIES <= n <= MAX_PARTIES:
        raise InvalidModelError(f"n must lie in [{MIN_PARTIES}, {MAX_PARTIES}], got {n}")
    if not 1 <= max_cardinality <= LHV_MAX_CARDINALITY:
        raise InvalidModelError(f"max_cardinality must lie in [1, {LHV_MAX_CARDINALITY}], got {max_cardinality}")
    rng = np.random.default_rng(seed)
    cards = rng.integers(1, max_cardinality + 1, size=n)
    for s in trivial_sources:
        if not 0 <= s < n:
            raise InvalidModelError(f"Trivial source {s} out of range for n={n}")
        cards[s] = 1
    dists = tuple(rng.dirichlet(np.ones(c)) for c in cards)
    responses = tuple(
        rng.dirichlet(np.ones(4), size=(int(cards[(p - 1) % n]), int(cards[p]))) for p in range(n)
    )
    return LhvModel(source_dists=dists, responses=responses)


def model_distribution(model: LhvModel) -> ProbabilityTable:
    """Exact p(o_1, ..., o_n) summed over every hidden-variable tuple."""
    n = model.n
    size = int(np.prod(model.cardinalities))
    if size > LHV_STATE_SPACE_CAP:
        raise StateSpaceTooLargeError(f"Hidden-variable space has {size} tuples, cap is {LHV_STATE_SPACE_CAP}")
    operands: List[object] = []
    for s, dist in enumerate(model.source_dists):
        operands.extend([dist, [s]])
    for p, resp in enumerate(model.responses):
        operands.extend([resp, [(p - 1) % n, p, n + p]])
    operands.append([n + p for p in range(n)])
    return ProbabilityTable(np.einsum(*operands, optimize="greedy"))


def deterministic_model(outputs: Sequence[np.ndarray], cardinalities: Sequence[int]) -> LhvModel:
    """Uniform sources and party p answering outputs[p][lambda_{p-1}, lambda_p]."""
    n = len(cardinalities)
    dists = tuple(np.full(c, 1.0 / c) for c in cardinalities)
    responses = tuple(np.eye(4)[np.asarray(outputs[p], dtype=int)] for p in range(n))
    return LhvModel(source_dists=dists, responses=responses)


def shared_outer_source_model() -> Tuple[LhvModel, Tuple[SignFunction, SignFunction, SignFunction]]:
    """
    Triangle model whose only random source is the one between parties 0 and 2.

    Both outer parties announce outcome (0, lambda) for a uniform bit lambda
    and the middle party always announces (0, 0). With the returned signs it
    reaches I1 = I2 = 1/2.
    """
    outputs = [
        np.array([[0], [1]]),  # (lambda_2, lambda_0)
        np.array([[0]]),  # (lambda_0, lambda_1)
        np.array([[0, 1]]),  # (lambda_1, lambda_2)
    ]
    model = deterministic_model(outputs, (1, 1, 2))
    outer = SignFunction.from_string("+++++-++")
    return model, (outer, SignFunction.from_string("++++++++"), outer)


@dataclass(frozen=True)
class LhvFailure:
    """A model and sign functions whose value exceeds the bound."""

    model_index: int
    t: int
    signs: Tuple[str, ...]
    s_value: float
    model: LhvModel = field(repr=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            "model_index": self.model_index,
            "t": self.t,
            "signs": list(self.signs),
            "s_value": self.s_value,
            "model": self.model.to_dict(),
        }


@dataclass(frozen=True)
class LhvSuiteReport:
    """Outcome of a hidden-variable suite."""

    n: int
    models: int
    evaluations: int
    max_s_value: float
    failure_cases: Tuple[LhvFailure, ...]

    @property
    def failures(self) -> int:
        return len(self.failure_cases)


def _check_one_model(
    index: int,
    seed: np.random.SeedSequence,
    n: int,
    triples: int,
    max_cardinality: int,
    trivial_sources: Sequence[int],
    ts: Sequence[int],
) -> Tuple[int, float, List[LhvFailure]]:
    model_seed, sign_seed = seed.spawn(2)
    model = sample_model(n, max_cardinality, model_seed, trivial_sources)
    table = model_distribution(model)
    rng = np.random.default_rng(sign_seed)
    evaluations, best, failures = 0, 0.0, []
    for _ in range(triples):
        fs = [random_sign_function(rng) for _ in range(n)]
        for t in ts:
            result: InequalityResult = evaluate_table(table, fs, t)
            evaluations += 1
            best = max(best, result.s_value)
            if result.s_value > 1.0 + VIOLATION_TOL:
                failures.append(
                    LhvFailure(
                        model_index=index,
                        t=t,
                        signs=tuple(fn.code for fn in fs),
                        s_value=result.s_value,
                        model=model,
                    )
                )
    return evaluations, best, failures


def run_lhv_suite(
    n: int,
    models: int,
    triples: int,
    max_cardinality: int = 4,
    seed: int = 0,
    trivial_sources: Sequence[int] = (),
    ts: Optional[Sequence[int]] = None,
    workers: Optional[int] = None,
) -> LhvSuiteReport:
    """
    Sample models, evaluate random sign functions, collect bound exceedances.

    Every model gets its own child seed, so the report does not depend on
    the worker count. For n=3 the standard middle party is distinguished;
    larger n check every choice unless ts is given.
    """
    if ts is None:
        ts = (2,) if n == 3 else tuple(range(1, n + 1))
    children = np.random.SeedSequence(seed).spawn(models)
    with get_executor(workers) as pool:
        outcomes = list(
            pool.map(
                lambda item: _check_one_model(
                    item[0], item[1], n, triples, max_cardinality, tuple(trivial_sources), tuple(ts)
                ),
                enumerate(children),
            )
        )
    evaluations = sum(o[0] for o in outcomes)
    max_s = max((o[1] for o in outcomes), default=0.0)
    failures = tuple(f for o in outcomes for f in o[2])
    if failures:
        logger.warning("%d hidden-variable cases exceed the bound (max s=%.10g)", len(failures), max_s)
    logger.info("LHV suite n=%d: %d models, %d evaluations, max s=%.10g", n, models, evaluations, max_s)
    return LhvSuiteReport(
        n=n, models=models, evaluations=evaluations, max_s_value=max_s, failure_cases=failures
    )


def archive_failures(report: LhvSuiteReport, dump_dir: Path) -> List[Path]:
    """Write each failure as JSON; returns the written paths."""
    if not report.failure_cases:
        return []
    dump_dir = Path(dump_dir)
    dump_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, failure in enumerate(report.failure_cases):
        path = dump_dir / f"failure_{failure.model_index:06d}_{k:04d}.json"
        path.write_text(json.dumps(failure.to_dict(), indent=2, sort_keys=True))
        paths.append(path)
    logger.info("Archived %d failures in %s", len(paths), dump_dir)
    return paths


@dataclass(frozen=True)
class DeterministicSweepResult:
    """Largest value over all deterministic response assignments."""

    max_s_value: float
    assignments: int
    outputs: Tuple[np.ndarray, np.ndarray, np.ndarray]


def _assignments(rows: int, cols: int) -> np.ndarray:
    return np.array(list(product(range(4), repeat=rows * cols)), dtype=int).reshape(-1, rows, cols)


def deterministic_sweep(
    signs: Sequence[SignFunction],
    cardinalities: Sequence[int],
    chunk: int = 16,
) -> DeterministicSweepResult:
    """
    Enumerate every deterministic triangle model on uniform sources.

    cardinalities are (|Lambda_0|, |Lambda_1|, |Lambda_2|). The inequality
    terms of all assignments are contracted in chunks over party 0.
    """
    if len(cardinalities) != 3 or len(signs) != 3:
        raise InvalidModelError("Deterministic sweep is defined for triangles")
    c0, c1, c2 = (int(c) for c in cardinalities)
    total = 4 ** (c2 * c0) * 4 ** (c0 * c1) * 4 ** (c1 * c2)
    if min(c0, c1, c2) < 1 or total > DETERMINISTIC_SWEEP_CAP:
        raise StateSpaceTooLargeError(f"{total} deterministic assignments exceed cap {DETERMINISTIC_SWEEP_CAP}")
    f, g, h = signs
    out0, out1, out2 = _assignments(c2, c0), _assignments(c0, c1), _assignments(c1, c2)
    norm = 4.0 * c0 * c1 * c2
    vectors = []
    for j in (1, 2):
        sign = (-1) ** j
        vectors.append(
            (
                (f.table[0] + sign * f.table[1])[out0].astype(float),
                g.table[j - 1][out1].astype(float),
                (h.table[0] + sign * h.table[1])[out2].astype(float),
            )
        )
    best, best_idx = -1.0, (0, 0, 0)
    for start in range(0, out0.shape[0], chunk):
        stop = min(start + chunk, out0.shape[0])
        terms = [
            np.einsum("xca,yab,zbc->xyz", u[start:stop], gv, w, optimize=True) / norm
            for u, gv, w in vectors
        ]
        s_vals = np.sqrt(np.abs(terms[0])) + np.sqrt(np.abs(terms[1]))
        idx = np.unravel_index(int(np.argmax(s_vals)), s_vals.shape)
        if s_vals[idx] > best:
            best = float(s_vals[idx])
            best_idx = (start + int(idx[0]), int(idx[1]), int(idx[2]))
    logger.info("Deterministic sweep over %d assignments: max s=%.10g", total, best)
    return DeterministicSweepResult(
        max_s_value=best,
        assignments=total,
        outputs=(out0[best_idx[0]], out1[best_idx[1]], out2[best_idx[2]]),
    )
