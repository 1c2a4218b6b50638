"""
MIP relaxation of a ReLU network.

Each unit has a binary gate h and a continuous output hrelu. Products of a
weight and a ReLU output are replaced by z, bounded by McCormick envelopes
over one of P equal pieces of the weight range; a one-hot lambda selects the
piece. With the ReLU lower bound fixed at 0 the envelopes are exact at the
piece endpoints and loosen in between.
"""

import logging
from typing import Optional

import numpy as np

from data.xor import Dataset
from formulations.arch import ArchSpec, HyperParams, partition_endpoints
from formulations.artifact import BuildArtifact, FormulationConstants, check_inputs, layer_bound
from formulations.errors import FormulationError
from formulations.index import VarIndex, var_name
from formulations.layers import (Terms, add_output_definitions, data_preactivation, declare_parameters,
                                 layer_shape, product_preactivation)
from formulations.objective import attach_nll_objective
from mip.ir import ModelIR

logger = logging.getLogger(__name__)


def default_hrelu_ub(params: HyperParams, d: int, input_max: float) -> float:
    if params.hrelu_ub is not None:
        return params.hrelu_ub
    return max(1.0, layer_bound(params, d, input_max))


def build_relu_full(dataset: Dataset, arch: ArchSpec, params: Optional[HyperParams] = None) -> BuildArtifact:
    """
    Build the ReLU network relaxation.

    Args:
        dataset: Training inputs X (N x d) and one-hot labels Y (N x J)
        arch: Shape with activation "relu" and L >= 1
        params: Constants, including the partition count P and hrelu_ub

    Returns:
        BuildArtifact

    Raises:
        FormulationError: On L = 0, P < 1, hrelu_ub <= 0 or bad data
    """
    params = params or HyperParams()
    if arch.activation != "relu":
        raise FormulationError(f"build_relu_full needs a relu architecture, got {arch.activation!r}")
    if arch.L < 1:
        raise FormulationError("L must be at least 1; use build_output_layer for L = 0")
    if params.P < 1:
        raise FormulationError(f"P must be at least 1, got {params.P}")
    if params.hrelu_ub is not None and params.hrelu_ub <= 0:
        raise FormulationError(f"hrelu_ub must be positive, got {params.hrelu_ub}")
    X, Y = check_inputs(dataset.X, dataset.Y, arch)
    N, d, K, L, J, P = X.shape[0], arch.d, arch.K, arch.L, arch.J, params.P

    input_max = float(np.max(np.abs(X)))
    h_ub = default_hrelu_ub(params, d, input_max)
    first_bound = layer_bound(params, d, input_max)
    hidden_bound = layer_bound(params, K, h_ub)
    constants = FormulationConstants(
        gate_m={0: params.M or 2.0 * max(first_bound, h_ub),
                **{layer: params.M or 2.0 * max(hidden_bound, h_ub) for layer in range(1, L)}},
        mccormick_m=params.M or 4.0 * params.alpha_abs * h_ub,
        diversify_m=params.M or 2.0 * hidden_bound + params.eps,
        output_bound=hidden_bound,
        hrelu_ub=h_ub,
        input_max=input_max,
    )
    z_lb, z_ub = min(params.alpha_lb, 0.0) * h_ub, max(params.alpha_ub, 0.0) * h_ub
    a_lo, a_hi = partition_endpoints(params.alpha_lb, params.alpha_ub, P)

    model = ModelIR(name=f"relu_N{N}_d{d}_K{K}_L{L}_J{J}_P{P}")
    index = VarIndex()
    declare_parameters(model, index, arch, params)
    for layer in range(L):
        for n in range(N):
            for k in range(K):
                index.add(model, "h", (n, k, layer), kind="binary")
    for layer in range(L):
        for n in range(N):
            for k in range(K):
                index.add(model, "hrelu", (n, k, layer), lb=0.0, ub=h_ub)
    for n in range(N):
        for j in range(J):
            index.add(model, "h", (n, j, L), lb=-hidden_bound, ub=hidden_bound)
    for layer in range(1, L + 1):
        _, units = layer_shape(arch, layer)
        for n in range(N):
            for kp in range(K):
                for k in range(units):
                    index.add(model, "z", (n, kp, k, layer), lb=z_lb, ub=z_ub)
    for layer in range(1, L + 1):
        _, units = layer_shape(arch, layer)
        for kp in range(K):
            for k in range(units):
                for p in range(P):
                    index.add(model, "lambda", (kp, k, layer, p), kind="binary")
    for n in range(N):
        index.add(model, "omega", (n,), lb=-hidden_bound, ub=hidden_bound)

    for layer in range(L):
        for n in range(N):
            for k in range(K):
                if layer == 0:
                    pre = data_preactivation(index, X[n], k, 0)
                else:
                    pre = product_preactivation(index, n, K, k, layer)
                _add_relu_gate(model, index, pre, n, k, layer, constants.gate_m[layer], params.eps)

    for layer in range(1, L + 1):
        _, units = layer_shape(arch, layer)
        for n in range(N):
            for kp in range(K):
                for k in range(units):
                    for p in range(P):
                        _add_mccormick_piece(model, index, (n, kp, k, layer), p, float(a_lo[p]), float(a_hi[p]),
                                             h_ub, constants.mccormick_m)
        for kp in range(K):
            for k in range(units):
                _add_partition_choice(model, index, kp, k, layer, a_lo, a_hi)

    for n in range(N):
        for j in range(J):
            add_output_definitions(model, index, product_preactivation(index, n, K, j, L), n, j, L)

    attach_nll_objective(model, index, Y, params.eps, constants.diversify_m, L)
    stats = model.stats()
    logger.info(f"built {model.name}: {stats.variables} vars ({stats.binaries} binary), {stats.constraints} rows")
    return BuildArtifact(model=model, index=index, arch=arch, params=params, constants=constants)


def _add_relu_gate(model: ModelIR, index: VarIndex, pre: Terms, n: int, k: int, layer: int,
                   big_m: float, eps: float) -> None:
    """Gate on: hrelu equals the pre-activation (>= eps). Gate off: hrelu = 0, pre-activation <= 0."""
    h = index.id("h", n, k, layer)
    hr = index.id("hrelu", n, k, layer)
    key = (n, k, layer)
    minus_pre = [(v, -c) for v, c in pre]
    model.add_row(pre + [(h, -big_m)], "<=", 0.0, name=var_name("gate_off", *key))
    model.add_row(pre + [(h, -(big_m + eps))], ">=", -big_m, name=var_name("gate_on", *key))
    model.add_row([(hr, 1.0)] + minus_pre + [(h, big_m)], "<=", big_m, name=var_name("gate_relu_hi", *key))
    model.add_row([(hr, 1.0)] + minus_pre + [(h, -big_m)], ">=", -big_m, name=var_name("gate_relu_lo", *key))
    model.add_row([(hr, 1.0), (h, -big_m)], "<=", 0.0, name=var_name("gate_relu_on", *key))
    model.add_row([(hr, 1.0), (h, big_m)], ">=", 0.0, name=var_name("gate_relu_neg", *key))


def _add_mccormick_piece(model: ModelIR, index: VarIndex, key, p: int, a_lo: float, a_hi: float,
                         h_ub: float, big_m: float) -> None:
    """Envelope of z = alpha * hrelu on piece p, relaxed by M(1 - lambda_p)."""
    n, kp, k, layer = key
    z = index.id("z", n, kp, k, layer)
    hr = index.id("hrelu", n, kp, layer - 1)
    alpha = index.id("alpha", kp, k, layer)
    lam = index.id("lambda", kp, k, layer, p)
    tag = key + (p,)
    model.add_row([(z, 1.0), (hr, -a_lo), (lam, -big_m)], ">=", -big_m, name=var_name("mc_under_lo", *tag))
    model.add_row([(z, 1.0), (hr, -a_hi), (alpha, -h_ub), (lam, -big_m)], ">=", -a_hi * h_ub - big_m,
                  name=var_name("mc_under_hi", *tag))
    model.add_row([(z, 1.0), (hr, -a_hi), (lam, big_m)], "<=", big_m, name=var_name("mc_over_hi", *tag))
    model.add_row([(z, 1.0), (hr, -a_lo), (alpha, -h_ub), (lam, big_m)], "<=", -a_lo * h_ub + big_m,
                  name=var_name("mc_over_lo", *tag))


def _add_partition_choice(model: ModelIR, index: VarIndex, kp: int, k: int, layer: int,
                          a_lo: np.ndarray, a_hi: np.ndarray) -> None:
    """Exactly one piece is active and alpha lies inside it."""
    alpha = index.id("alpha", kp, k, layer)
    lambdas = [index.id("lambda", kp, k, layer, p) for p in range(len(a_lo))]
    key = (kp, k, layer)
    model.add_row([(lam, 1.0) for lam in lambdas], "=", 1.0, name=var_name("part_one", *key))
    model.add_row([(alpha, 1.0)] + [(lam, -float(lo)) for lam, lo in zip(lambdas, a_lo)], ">=", 0.0,
                  name=var_name("part_lo", *key))
    model.add_row([(alpha, 1.0)] + [(lam, -float(hi)) for lam, hi in zip(lambdas, a_hi)], "<=", 0.0,
                  name=var_name("part_hi", *key))
