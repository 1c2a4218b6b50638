"""Read network parameters and unit values out of a MIP solution."""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from formulations.arch import ArchSpec, HyperParams
from formulations.errors import FormulationError
from formulations.index import VarIndex, var_name
from mip.branch_bound import MIPSolution
from network.errors import ExtractionError
from network.net import TrainedNet

logger = logging.getLogger(__name__)

CLAMP_TOL = 1e-6


def _values(solution: Union[MIPSolution, Sequence[float]]) -> np.ndarray:
    if isinstance(solution, MIPSolution):
        if solution.incumbent is None:
            logger.error(f"cannot extract a network from a {solution.status.value} solve")
            raise ExtractionError(f"solution has no incumbent (status {solution.status.value})")
        return solution.incumbent
    return np.asarray(solution, dtype=float)


def _read(values: np.ndarray, index: VarIndex, role: str, *key: int) -> float:
    try:
        var_id = index.id(role, *key)
    except FormulationError:
        raise ExtractionError(f"solution has no variable {var_name(role, *key)}") from None
    if var_id >= len(values):
        raise ExtractionError(f"solution has no value for {var_name(role, *key)}")
    return float(values[var_id])


def _clamp(value: float, lb: float, ub: float, name: str) -> float:
    if value < lb - CLAMP_TOL or value > ub + CLAMP_TOL:
        logger.error(f"{name}={value} is outside [{lb}, {ub}]")
        raise ExtractionError(f"{name}={value!r} lies outside [{lb}, {ub}] beyond tolerance {CLAMP_TOL}")
    return min(max(value, lb), ub)


def extract_net(solution: Union[MIPSolution, Sequence[float]], index: VarIndex, arch: ArchSpec,
                params: HyperParams) -> TrainedNet:
    """
    Build a TrainedNet from the alpha and beta values of a solution.

    Args:
        solution: A solve with an incumbent, or a full value vector
        index: Variable index of the solved model
        arch: Architecture of the solved model
        params: Constants of the solved model (bounds and eps)

    Returns:
        TrainedNet; values within 1e-6 outside a bound are clamped onto it

    Raises:
        ExtractionError: On a missing incumbent or variable, or an
            out-of-bounds value
    """
    values = _values(solution)
    weights, biases = [], []
    for layer in range(arch.L + 1):
        fan_in = arch.d if layer == 0 else arch.K
        units = arch.J if layer == arch.L else arch.K
        w = np.empty((fan_in, units))
        for i in range(fan_in):
            for k in range(units):
                w[i, k] = _clamp(_read(values, index, "alpha", i, k, layer), params.alpha_lb, params.alpha_ub,
                                 var_name("alpha", i, k, layer))
        b = np.array([_clamp(_read(values, index, "beta", k, layer), params.beta_lb, params.beta_ub,
                             var_name("beta", k, layer)) for k in range(units)])
        weights.append(w)
        biases.append(b)
    return TrainedNet(activation=arch.activation, weights=weights, biases=biases, eps=params.eps)


def extract_activations(solution: Union[MIPSolution, Sequence[float]], index: VarIndex, arch: ArchSpec,
                        n_rows: int) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Unit values stored in a solution: binary h (or hrelu for ReLU models) per
    hidden layer as N x K matrices, and the N x J output values.
    """
    values = _values(solution)
    role = "h" if arch.activation == "binary" else "hrelu"
    hidden = []
    for layer in range(arch.L):
        hidden.append(np.array([[_read(values, index, role, n, k, layer) for k in range(arch.K)]
                                for n in range(n_rows)]))
    out = np.array([[_read(values, index, "h", n, j, arch.L) for j in range(arch.J)] for n in range(n_rows)])
    return hidden, out
