"""
API routes for single-network evaluations.

Evaluate a network spec, list its joint distribution, search the best sign
triple for a triangle, and look up named sign functions.
"""

from typing import Any, Dict, List

from fastapi import APIRouter, Body, HTTPException, Query, status

import scanner
from errors import PolylocError, UnknownSignFunctionError
from inequalities import named_sign_function, named_sign_functions
from network import joint_distribution, network_from_schema
from schemas import DistributionRow, EvaluationResponse, SignFunctionResponse, SignSearchResponse

router = APIRouter(prefix="/evaluations", tags=["evaluations"])


def _evaluate(network: Dict[str, Any], search: bool = False) -> scanner.Evaluation:
    try:
        return scanner.evaluate_template(network, search=search)
    except PolylocError as exc:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))


def _rows(evaluation: scanner.Evaluation) -> List[DistributionRow]:
    return [
        DistributionRow(outcomes=list(outcomes), probability=probability)
        for outcomes, probability in evaluation.distribution.rows()
    ]


@router.post("/", response_model=EvaluationResponse)
def evaluate_network(
    network: Dict[str, Any] = Body(..., description="Network-spec, placeholders resolved from params"),
    include_table: bool = Query(False, description="Also return the joint distribution"),
) -> EvaluationResponse:
    """Evaluate the inequality for one network."""
    evaluation = _evaluate(network)
    response = EvaluationResponse.model_validate(evaluation)
    if include_table:
        response.table = _rows(evaluation)
    return response


@router.post("/distribution", response_model=List[DistributionRow])
def get_distribution(network: Dict[str, Any] = Body(...)) -> List[DistributionRow]:
    """Joint outcome distribution in lexicographic order."""
    try:
        model = scanner.build_network(network)
        table = joint_distribution(network_from_schema(model))
    except PolylocError as exc:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    return [DistributionRow(outcomes=list(o), probability=p) for o, p in table.rows()]


@router.post("/search-signs", response_model=SignSearchResponse)
def search_signs(network: Dict[str, Any] = Body(...)) -> SignSearchResponse:
    """Best sign triple for a triangle network."""
    return SignSearchResponse.model_validate(_evaluate(network, search=True))


@router.get("/signs", response_model=List[str])
def list_sign_functions() -> List[str]:
    """Names accepted wherever a sign function is expected."""
    return named_sign_functions()


@router.get("/signs/{name}", response_model=SignFunctionResponse)
def get_sign_function(name: str) -> SignFunctionResponse:
    """Table of a named sign function. Returns 404 if the name is unknown."""
    try:
        fn = named_sign_function(name)
    except UnknownSignFunctionError:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Sign function {name} not found",
        )
    return SignFunctionResponse(name=name.upper(), signs=fn.code, table=fn.table.tolist())
