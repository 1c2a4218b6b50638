from formulations.arch import ArchSpec, HyperParams, partition_endpoints
from formulations.artifact import BuildArtifact, FormulationConstants
from formulations.binary import build_binary_full
from formulations.census import Census, binary_census, output_census, relu_census
from formulations.errors import FormulationError
from formulations.index import VarIndex, parse_var_name, var_name
from formulations.objective import (attach_nll_objective, linearized_nll_value, mccormick_envelope,
                                    softmax_nll_value)
from formulations.output_layer import build_output_layer
from formulations.relu import build_relu_full

__all__ = [
    "ArchSpec",
    "BuildArtifact",
    "Census",
    "FormulationConstants",
    "FormulationError",
    "HyperParams",
    "VarIndex",
    "attach_nll_objective",
    "binary_census",
    "build_binary_full",
    "build_output_layer",
    "build_relu_full",
    "linearized_nll_value",
    "mccormick_envelope",
    "output_census",
    "parse_var_name",
    "partition_endpoints",
    "relu_census",
    "softmax_nll_value",
    "var_name",
]
