"""Result of a formulation build and the input checks shared by every builder."""

import logging
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from formulations.arch import ArchSpec, HyperParams
from formulations.errors import FormulationError
from formulations.index import VarIndex
from mip.ir import ModelIR

logger = logging.getLogger(__name__)


class FormulationConstants(BaseModel):
    """Big-M values and variable boxes actually used by a build."""
    gate_m: Dict[int, float] = Field(default_factory=dict, description="Activation big-M per hidden layer")
    z_m: float = Field(default=0.0, description="Big-M of the binary product rows")
    mccormick_m: float = Field(default=0.0, description="Relaxation constant of inactive McCormick pieces")
    diversify_m: float = Field(default=0.0, description="Big-M of the diversification rows")
    output_bound: float = Field(default=0.0, description="|h| bound on output units and omega")
    hrelu_ub: float = Field(default=0.0, description="Upper bound on ReLU unit outputs")
    input_max: float = Field(default=1.0, description="max |x| over the training inputs")


class BuildArtifact(BaseModel):
    """A built model together with everything needed to read its solutions."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: ModelIR
    index: VarIndex
    arch: ArchSpec
    params: HyperParams
    constants: FormulationConstants


def check_inputs(X: np.ndarray, Y: np.ndarray, arch: ArchSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Validate a training set against an architecture.

    Returns:
        (X, Y) as float arrays

    Raises:
        FormulationError: On an empty set, shape mismatch or non-finite input
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        logger.error(f"cannot build a model from an empty training set (X shape {X.shape})")
        raise FormulationError("training set is empty")
    if X.shape[1] != arch.d:
        raise FormulationError(f"inputs have {X.shape[1]} features, architecture expects d={arch.d}")
    if Y.shape != (X.shape[0], arch.J):
        raise FormulationError(f"labels have shape {Y.shape}, expected ({X.shape[0]}, {arch.J})")
    if not np.all(np.isfinite(X)):
        raise FormulationError("inputs contain non-finite values")
    return X, Y


def layer_bound(params: HyperParams, fan_in: int, input_max: float) -> float:
    """Largest |pre-activation| reachable within the weight and bias boxes."""
    return params.alpha_abs * fan_in * input_max + params.beta_abs
