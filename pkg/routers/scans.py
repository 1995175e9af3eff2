"""
API routes for the scanner workflows: sweeps, thresholds, maximization,
discrepancy reports, entanglement verdicts, linear comparison and LHV suites.
"""

from typing import List

from fastapi import APIRouter, Depends, HTTPException, status

import scanner
from config import get_settings
from errors import PolylocError, UnknownTargetError
from lhv import run_lhv_suite
from schemas import (
    CompareLinearRequest,
    DiscrepancyReportResponse,
    DiscrepancyRequest,
    EntanglementRequest,
    EntanglementResponse,
    LhvSuiteResponse,
    LhvTestRequest,
    LinearComparisonResponse,
    MaximizeRequest,
    MaximizeResponse,
    SweepRowResponse,
    SweepSpec,
    ThresholdRequest,
    ThresholdResponse,
)

router = APIRouter(prefix="/scans", tags=["scans"])


def get_workers() -> int:
    """Worker threads for one request."""
    return get_settings().threads


def _unprocessable(exc: Exception) -> HTTPException:
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))


@router.post("/sweep", response_model=List[SweepRowResponse])
def run_sweep(spec: SweepSpec, workers: int = Depends(get_workers)) -> List[SweepRowResponse]:
    """Evaluate a template on a grid, rows in grid order."""
    try:
        rows = scanner.sweep(spec, workers=workers)
    except PolylocError as exc:
        raise _unprocessable(exc)
    return [SweepRowResponse.model_validate(row) for row in rows]


@router.post("/threshold", response_model=ThresholdResponse)
def run_threshold(request: ThresholdRequest) -> ThresholdResponse:
    """Parameter value where s_value crosses 1."""
    try:
        result = scanner.find_threshold(request.network, request.parameter, request.lo, request.hi, request.xtol)
    except PolylocError as exc:
        raise _unprocessable(exc)
    return ThresholdResponse.model_validate(result)


@router.post("/maximize", response_model=MaximizeResponse)
def run_maximize(request: MaximizeRequest, workers: int = Depends(get_workers)) -> MaximizeResponse:
    """Maximize a catalogued quantity or a template's s_value."""
    try:
        if request.quantity is not None:
            result = scanner.maximize_quantity(
                request.quantity, request.box, points_per_axis=request.points_per_axis, workers=workers
            )
        else:
            result = scanner.maximize_template(
                request.network, request.box, points_per_axis=request.points_per_axis, workers=workers
            )
    except UnknownTargetError as exc:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(exc))
    except PolylocError as exc:
        raise _unprocessable(exc)
    return MaximizeResponse.model_validate(result)


@router.post("/discrepancies", response_model=List[DiscrepancyReportResponse])
def run_discrepancies(
    request: DiscrepancyRequest, workers: int = Depends(get_workers)
) -> List[DiscrepancyReportResponse]:
    """Printed closed forms against the first-principles pipeline."""
    try:
        reports = scanner.discrepancy_report(request.targets, grid=request.grid, workers=workers)
    except UnknownTargetError as exc:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(exc))
    except PolylocError as exc:
        raise _unprocessable(exc)
    return [DiscrepancyReportResponse.model_validate(r) for r in reports]


@router.post("/entanglement", response_model=EntanglementResponse)
def run_entanglement(request: EntanglementRequest) -> EntanglementResponse:
    """all-entangled or inconclusive for three pure sources."""
    try:
        verdict = scanner.entanglement_detect(request.sources, request.povm, request.signs)
    except PolylocError as exc:
        raise _unprocessable(exc)
    return EntanglementResponse.model_validate(verdict)


@router.post("/compare-linear", response_model=LinearComparisonResponse)
def run_compare_linear(request: CompareLinearRequest) -> LinearComparisonResponse:
    """Triangle s_value against the linear-chain criterion."""
    try:
        comparison = scanner.compare_linear(request.network)
    except PolylocError as exc:
        raise _unprocessable(exc)
    return LinearComparisonResponse.model_validate(comparison)


@router.post("/lhv-test", response_model=LhvSuiteResponse)
def run_lhv_test(request: LhvTestRequest, workers: int = Depends(get_workers)) -> LhvSuiteResponse:
    """Random hidden-variable models checked against the bound."""
    try:
        report = run_lhv_suite(
            n=request.n,
            models=request.models,
            triples=request.triples,
            max_cardinality=request.max_cardinality,
            seed=request.seed,
            trivial_sources=request.trivial_sources,
            workers=workers,
        )
    except PolylocError as exc:
        raise _unprocessable(exc)
    return LhvSuiteResponse.model_validate(report)
