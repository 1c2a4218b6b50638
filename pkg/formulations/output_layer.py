"""Model of a network with no hidden layer: an affine map from inputs to outputs."""

import logging
from typing import Optional

import numpy as np

from data.xor import Dataset
from formulations.arch import ArchSpec, HyperParams
from formulations.artifact import BuildArtifact, FormulationConstants, check_inputs, layer_bound
from formulations.errors import FormulationError
from formulations.index import VarIndex
from formulations.layers import add_output_definitions, data_preactivation, declare_parameters
from formulations.objective import attach_nll_objective
from mip.ir import ModelIR

logger = logging.getLogger(__name__)


def build_output_layer(dataset: Dataset, arch: ArchSpec, params: Optional[HyperParams] = None) -> BuildArtifact:
    """
    Build the output-layer model used as the last step of greedy ReLU
    training. The inputs may be continuous; no product terms appear, so the
    only binaries are the diversification indicators.

    Args:
        dataset: Inputs X (N x d) and one-hot labels Y (N x J)
        arch: Shape with L = 0; K and activation are ignored
        params: Constants

    Returns:
        BuildArtifact

    Raises:
        FormulationError: If L != 0 or the data is empty or mismatched
    """
    params = params or HyperParams()
    if arch.L != 0:
        raise FormulationError(f"build_output_layer needs L = 0, got L = {arch.L}")
    X, Y = check_inputs(dataset.X, dataset.Y, arch)
    N, d, J = X.shape[0], arch.d, arch.J

    input_max = float(np.max(np.abs(X)))
    bound = layer_bound(params, d, input_max)
    constants = FormulationConstants(
        diversify_m=params.M or 2.0 * bound + params.eps,
        output_bound=bound,
        input_max=input_max,
    )

    model = ModelIR(name=f"output_N{N}_d{d}_J{J}")
    index = VarIndex()
    declare_parameters(model, index, arch, params)
    for n in range(N):
        for j in range(J):
            index.add(model, "h", (n, j, 0), lb=-bound, ub=bound)
    for n in range(N):
        index.add(model, "omega", (n,), lb=-bound, ub=bound)

    for n in range(N):
        for j in range(J):
            add_output_definitions(model, index, data_preactivation(index, X[n], j, 0), n, j, 0)

    attach_nll_objective(model, index, Y, params.eps, constants.diversify_m, 0)
    logger.info(f"built {model.name}: {model.num_vars} vars, {model.num_constraints} rows")
    return BuildArtifact(model=model, index=index, arch=arch, params=params, constants=constants)
