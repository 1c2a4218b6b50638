"""Declarations and rows shared by the binary, ReLU and output-layer builders."""

from typing import List, Tuple

import numpy as np

from formulations.arch import ArchSpec, HyperParams
from formulations.index import VarIndex, var_name
from mip.ir import ModelIR

Terms = List[Tuple[int, float]]


def layer_shape(arch: ArchSpec, layer: int) -> Tuple[int, int]:
    """(fan_in, units) of a layer; layer arch.L is the output layer."""
    fan_in = arch.d if layer == 0 else arch.K
    units = arch.J if layer == arch.L else arch.K
    return fan_in, units


def declare_parameters(model: ModelIR, index: VarIndex, arch: ArchSpec, params: HyperParams) -> None:
    """alpha[i][k][l] for every layer, then beta[k][l] for every layer."""
    for layer in range(arch.L + 1):
        fan_in, units = layer_shape(arch, layer)
        for i in range(fan_in):
            for k in range(units):
                index.add(model, "alpha", (i, k, layer), lb=params.alpha_lb, ub=params.alpha_ub)
    for layer in range(arch.L + 1):
        _, units = layer_shape(arch, layer)
        for k in range(units):
            index.add(model, "beta", (k, layer), lb=params.beta_lb, ub=params.beta_ub)


def data_preactivation(index: VarIndex, x: np.ndarray, unit: int, layer: int) -> Terms:
    """sum_i alpha[i][unit][layer] * x_i + beta[unit][layer], with x as constants."""
    terms = [(index.id("alpha", i, unit, layer), float(v)) for i, v in enumerate(x) if v != 0.0]
    terms.append((index.id("beta", unit, layer), 1.0))
    return terms


def product_preactivation(index: VarIndex, n: int, fan_in: int, unit: int, layer: int) -> Terms:
    """sum_kp z[n][kp][unit][layer] + beta[unit][layer]."""
    terms = [(index.id("z", n, kp, unit, layer), 1.0) for kp in range(fan_in)]
    terms.append((index.id("beta", unit, layer), 1.0))
    return terms


def add_output_definitions(model: ModelIR, index: VarIndex, preactivation: Terms, n: int, j: int, layer: int) -> None:
    """h[n][j][layer] equals its affine pre-activation."""
    terms = [(index.id("h", n, j, layer), 1.0)] + [(v, -c) for v, c in preactivation]
    model.add_row(terms, "=", 0.0, name=var_name("out_def", n, j))


def add_binary_gate(model: ModelIR, index: VarIndex, preactivation: Terms, n: int, k: int, layer: int,
                    big_m: float, eps: float) -> None:
    """
    h = 1 forces the pre-activation into [eps, M]; h = 0 forces it into
    [-M, 0], leaving (0, eps) infeasible.
    """
    h = index.id("h", n, k, layer)
    model.add_row(preactivation + [(h, -big_m)], "<=", 0.0, name=var_name("gate_off", n, k, layer))
    model.add_row(preactivation + [(h, -(big_m + eps))], ">=", -big_m, name=var_name("gate_on", n, k, layer))
