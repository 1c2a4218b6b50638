"""Exact MIP model of a binary-activation network trained on the linearized NLL."""

import logging
from typing import Optional

import numpy as np

from data.xor import Dataset
from formulations.arch import ArchSpec, HyperParams
from formulations.artifact import BuildArtifact, FormulationConstants, check_inputs, layer_bound
from formulations.errors import FormulationError
from formulations.index import VarIndex, var_name
from formulations.layers import (add_binary_gate, add_output_definitions, data_preactivation,
                                 declare_parameters, layer_shape, product_preactivation)
from formulations.objective import attach_nll_objective
from mip.ir import ModelIR

logger = logging.getLogger(__name__)


def build_binary_full(dataset: Dataset, arch: ArchSpec, params: Optional[HyperParams] = None) -> BuildArtifact:
    """
    Build the binary network model.

    Layer 0 is linear in alpha because the inputs are data. Every later layer
    multiplies a weight by a binary unit, which is modeled exactly by a
    product variable z = alpha * h and four big-M rows.

    Args:
        dataset: Training inputs X (N x d) and one-hot labels Y (N x J)
        arch: Shape with activation "binary" and L >= 1
        params: Constants; defaults are used when omitted

    Returns:
        BuildArtifact

    Raises:
        FormulationError: On L = 0, a non-binary activation or bad data
    """
    params = params or HyperParams()
    if arch.activation != "binary":
        raise FormulationError(f"build_binary_full needs a binary architecture, got {arch.activation!r}")
    if arch.L < 1:
        raise FormulationError("L must be at least 1; use build_output_layer for L = 0")
    X, Y = check_inputs(dataset.X, dataset.Y, arch)
    N, d, K, L, J = X.shape[0], arch.d, arch.K, arch.L, arch.J

    input_max = float(np.max(np.abs(X)))
    hidden_bound = layer_bound(params, K, 1.0)
    constants = FormulationConstants(
        gate_m={0: params.M or 2.0 * layer_bound(params, d, input_max),
                **{layer: params.M or 2.0 * hidden_bound for layer in range(1, L)}},
        z_m=params.M or params.alpha_abs,
        diversify_m=params.M or 2.0 * hidden_bound + params.eps,
        output_bound=hidden_bound,
        input_max=input_max,
    )
    z_lb, z_ub = min(params.alpha_lb, 0.0), max(params.alpha_ub, 0.0)

    model = ModelIR(name=f"binary_N{N}_d{d}_K{K}_L{L}_J{J}")
    index = VarIndex()
    declare_parameters(model, index, arch, params)
    for layer in range(L):
        for n in range(N):
            for k in range(K):
                index.add(model, "h", (n, k, layer), kind="binary")
    for n in range(N):
        for j in range(J):
            index.add(model, "h", (n, j, L), lb=-hidden_bound, ub=hidden_bound)
    for layer in range(1, L + 1):
        _, units = layer_shape(arch, layer)
        for n in range(N):
            for kp in range(K):
                for k in range(units):
                    index.add(model, "z", (n, kp, k, layer), lb=z_lb, ub=z_ub)
    for n in range(N):
        index.add(model, "omega", (n,), lb=-hidden_bound, ub=hidden_bound)

    for layer in range(L):
        for n in range(N):
            for k in range(K):
                if layer == 0:
                    pre = data_preactivation(index, X[n], k, 0)
                else:
                    pre = product_preactivation(index, n, K, k, layer)
                add_binary_gate(model, index, pre, n, k, layer, constants.gate_m[layer], params.eps)

    for layer in range(1, L + 1):
        _, units = layer_shape(arch, layer)
        for n in range(N):
            for kp in range(K):
                for k in range(units):
                    _add_binary_product(model, index, n, kp, k, layer, constants.z_m)

    for n in range(N):
        for j in range(J):
            add_output_definitions(model, index, product_preactivation(index, n, K, j, L), n, j, L)

    attach_nll_objective(model, index, Y, params.eps, constants.diversify_m, L)
    stats = model.stats()
    logger.info(f"built {model.name}: {stats.variables} vars ({stats.binaries} binary), {stats.constraints} rows")
    return BuildArtifact(model=model, index=index, arch=arch, params=params, constants=constants)


def _add_binary_product(model: ModelIR, index: VarIndex, n: int, kp: int, k: int, layer: int, big_m: float) -> None:
    """z = alpha when the input unit is on, z = 0 when it is off."""
    z = index.id("z", n, kp, k, layer)
    alpha = index.id("alpha", kp, k, layer)
    h = index.id("h", n, kp, layer - 1)
    key = (n, kp, k, layer)
    model.add_row([(z, 1.0), (alpha, -1.0), (h, big_m)], "<=", big_m, name=var_name("link_follow_hi", *key))
    model.add_row([(z, 1.0), (alpha, -1.0), (h, -big_m)], ">=", -big_m, name=var_name("link_follow_lo", *key))
    model.add_row([(z, 1.0), (h, -big_m)], "<=", 0.0, name=var_name("link_off_hi", *key))
    model.add_row([(z, 1.0), (h, big_m)], ">=", 0.0, name=var_name("link_off_lo", *key))
