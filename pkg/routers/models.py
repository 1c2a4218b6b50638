import math
from datetime import datetime, timezone
from typing import Dict, List, Literal, Optional

import numpy as np
from fastapi import APIRouter, Depends, HTTPException, Request
from pydantic import BaseModel, Field

from data.xor import Dataset
from dependencies import get_hyper_params, get_mip_params
from formulations.arch import ArchSpec, HyperParams
from formulations.binary import build_binary_full
from formulations.census import count_families
from formulations.errors import FormulationError
from formulations.output_layer import build_output_layer
from formulations.relu import build_relu_full
from mip.branch_bound import MIPParams, solve_mip
from mip.errors import ModelError, SolverError
from mip.lp_format import export_lp
from mip.mps import export_mps, import_mps
from network.errors import EvaluationError, NetFormatError
from network.evaluate import EvalReport, evaluate
from network.serialize import loads_net

router = APIRouter(prefix="/models")


class BuildRequest(BaseModel):
    X: List[List[float]] = Field(description="Training inputs, one row per sample")
    Y: List[List[float]] = Field(description="One-hot labels")
    arch: ArchSpec
    params: Optional[HyperParams] = Field(default=None, description="Formulation constants; server defaults when unset")
    format: Literal["mps", "lp"] = Field(default="mps", description="Text format of the returned model")


class SolveRequest(BaseModel):
    mps: str = Field(description="Model in MPS format")
    params: Optional[MIPParams] = Field(default=None, description="Solver parameters; server defaults when unset")


class EvaluateRequest(BaseModel):
    net: str = Field(description="Serialized network text")
    X: List[List[float]]
    Y: List[List[float]]


def _finite(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _dataset(X: List[List[float]], Y: List[List[float]]) -> Dataset:
    try:
        return Dataset(X=np.array(X, dtype=float), Y=np.array(Y, dtype=float))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"Invalid dataset: {e}")


@router.post("/build")
async def build(body: BuildRequest, request: Request, defaults: HyperParams = Depends(get_hyper_params)):
    """
    Build the MIP for a dataset and architecture and return it as MPS or LP text.
    """
    received_at = datetime.now(timezone.utc).isoformat()
    logger = request.app.state.logger
    dataset = _dataset(body.X, body.Y)
    params = body.params or defaults
    try:
        if body.arch.L == 0:
            artifact = build_output_layer(dataset, body.arch, params)
        elif body.arch.activation == "binary":
            artifact = build_binary_full(dataset, body.arch, params)
        else:
            artifact = build_relu_full(dataset, body.arch, params)
    except FormulationError as e:
        logger.warning(f"build rejected: {e}")
        raise HTTPException(status_code=400, detail=str(e))

    text = export_mps(artifact.model) if body.format == "mps" else export_lp(artifact.model)
    logger.info(f"built {artifact.model.name}: {artifact.model.num_vars} vars, {artifact.model.num_constraints} rows")
    return {
        "received_at": received_at,
        "completed_at": datetime.now(timezone.utc).isoformat(),
        "format": body.format,
        "model": text,
        "stats": artifact.model.stats().model_dump(),
        "families": count_families(artifact.model),
    }


@router.post("/solve")
async def solve(body: SolveRequest, request: Request, defaults: MIPParams = Depends(get_mip_params)):
    """
    Solve an MPS model with the embedded branch and bound.
    """
    logger = request.app.state.logger
    try:
        model = import_mps(body.mps)
    except ModelError as e:
        logger.warning(f"solve rejected: {e}")
        raise HTTPException(status_code=400, detail=f"Invalid MPS: {e}")

    try:
        solution = solve_mip(model, body.params or defaults)
    except SolverError as e:
        logger.error(f"solver failure on {model.name}: {e}")
        raise HTTPException(status_code=500, detail=f"Solver failure: {e}")

    values: Optional[Dict[str, float]] = None
    if solution.has_incumbent:
        values = {var.name: float(v) for var, v in zip(model.vars, solution.incumbent)}
    return {
        "status": solution.status.value,
        "objective": _finite(solution.objective),
        "best_bound": _finite(solution.best_bound),
        "gap": _finite(solution.gap),
        "nodes": solution.nodes,
        "wall_time": solution.wall_time,
        "values": values,
    }


@router.post("/evaluate", response_model=EvalReport)
async def evaluate_net(body: EvaluateRequest, request: Request):
    """
    Score a serialized network on labeled rows.
    """
    try:
        net = loads_net(body.net)
    except NetFormatError as e:
        raise HTTPException(status_code=400, detail=f"Invalid network: {e}")
    dataset = _dataset(body.X, body.Y)
    try:
        return evaluate(net, dataset)
    except EvaluationError as e:
        request.app.state.logger.warning(f"evaluate rejected: {e}")
        raise HTTPException(status_code=400, detail=str(e))
