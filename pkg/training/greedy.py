"""
Greedy layer-wise training with one-hidden-layer MIP subproblems.

Iteration l trains a network with a single hidden layer on inputs X_l (the
data for l = 0, the previous subproblem's hidden values otherwise) and the
unchanged labels. Its hidden layer is kept; the output layer of the last
iteration becomes the output layer of the stacked network.
"""

import logging
import time
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from data.xor import Dataset
from formulations.arch import ArchSpec, HyperParams
from formulations.artifact import BuildArtifact
from formulations.binary import build_binary_full
from formulations.output_layer import build_output_layer
from formulations.relu import build_relu_full
from mip.branch_bound import MIPParams, MIPSolution, solve_mip
from network.evaluate import evaluate
from network.extract import extract_activations, extract_net
from network.net import TrainedNet, forward_batch
from training.errors import TrainingError

logger = logging.getLogger(__name__)


class LayerRecord(BaseModel):
    layer: int = Field(description="Hidden layer trained, or L for the final output-layer solve")
    kind: str = Field(description="binary, relu or output")
    status: str
    objective: float
    gap: float
    nodes: int
    wall_time: float
    train_accuracy: float = Field(description="Accuracy of the stacked network so far, by full forward pass")


class GreedyTrace(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    records: List[LayerRecord] = Field(default_factory=list)
    layer_inputs: List[np.ndarray] = Field(default_factory=list, exclude=True,
                                           description="Input matrix of each hidden-layer subproblem")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.records], columns=list(LayerRecord.model_fields))

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False)


def _layer_params(mip_params: MIPParams, solves: int, layer_time_limit: Optional[float]) -> MIPParams:
    limit = layer_time_limit if layer_time_limit is not None else mip_params.time_limit / solves
    return mip_params.model_copy(update={"time_limit": limit})


def _solve(artifact: BuildArtifact, params: MIPParams, trace: GreedyTrace, layer: int) -> MIPSolution:
    solution = solve_mip(artifact.model, params)
    if solution.incumbent is None:
        logger.error(f"layer {layer} subproblem ended {solution.status.value} without an incumbent")
        raise TrainingError(f"layer {layer} solve returned no incumbent ({solution.status.value})", trace)
    return solution


def _record(trace: GreedyTrace, layer: int, kind: str, solution: MIPSolution, started: float,
            net: TrainedNet, dataset: Dataset) -> None:
    accuracy = evaluate(net, dataset).accuracy
    trace.records.append(LayerRecord(
        layer=layer, kind=kind, status=solution.status.value, objective=solution.objective, gap=solution.gap,
        nodes=solution.nodes, wall_time=time.perf_counter() - started, train_accuracy=accuracy,
    ))
    logger.info(f"greedy {kind} layer {layer}: {solution.status.value} obj={solution.objective:.6g} "
                f"gap={solution.gap:.3g} train_acc={accuracy:.4f}")


def _greedy(dataset: Dataset, L: int, K: int, params: HyperParams, mip_params: MIPParams,
            activation: str, builder: Callable[..., BuildArtifact],
            layer_time_limit: Optional[float]) -> Tuple[List[np.ndarray], List[np.ndarray], GreedyTrace, np.ndarray]:
    if L < 1 or K < 1:
        raise TrainingError(f"greedy training needs L >= 1 and K >= 1, got L={L}, K={K}")
    solves = L + 1 if activation == "relu" else L
    layer_params = _layer_params(mip_params, solves, layer_time_limit)
    trace = GreedyTrace()
    weights: List[np.ndarray] = []
    biases: List[np.ndarray] = []
    inputs = dataset.X

    for layer in range(L):
        started = time.perf_counter()
        trace.layer_inputs.append(inputs)
        sub_data = Dataset(X=inputs, Y=dataset.Y)
        arch = ArchSpec(d=inputs.shape[1], K=K, L=1, J=dataset.J, activation=activation)
        artifact = builder(sub_data, arch, params)
        solution = _solve(artifact, layer_params, trace, layer)
        sub_net = extract_net(solution, artifact.index, arch, params)
        hidden, _ = extract_activations(solution, artifact.index, arch, dataset.n)

        weights.append(sub_net.weights[0])
        biases.append(sub_net.biases[0])
        stacked = TrainedNet(activation=activation, weights=weights + [sub_net.weights[1]],
                             biases=biases + [sub_net.biases[1]], eps=params.eps)
        _record(trace, layer, activation, solution, started, stacked, dataset)

        if activation == "binary":
            inputs = np.round(hidden[0])
            replay, _ = forward_batch(stacked, dataset.X)
            mismatched = int(np.sum(replay[-1] != inputs))
            if mismatched:
                logger.warning(f"layer {layer}: {mismatched} hidden values differ between solve and forward pass")
        else:
            inputs = np.clip(hidden[0], 0.0, artifact.constants.hrelu_ub)
        output = (sub_net.weights[1], sub_net.biases[1])

    return weights + [output[0]], biases + [output[1]], trace, inputs


def greedy_binary(dataset: Dataset, L: int, K: int, params: Optional[HyperParams] = None,
                  mip_params: Optional[MIPParams] = None,
                  layer_time_limit: Optional[float] = None) -> Tuple[TrainedNet, GreedyTrace]:
    """
    Train L binary hidden layers of width K, one MIP per layer.

    Args:
        dataset: Training set
        L: Hidden layers (>= 1)
        K: Units per hidden layer (>= 1)
        params: Formulation constants
        mip_params: Solver parameters; time_limit is split evenly across layers
        layer_time_limit: Per-layer time limit overriding the even split

    Returns:
        (TrainedNet, GreedyTrace)

    Raises:
        TrainingError: When a layer solve finds no incumbent (trace attached)
    """
    params = params or HyperParams()
    mip_params = mip_params or MIPParams()
    weights, biases, trace, _ = _greedy(dataset, L, K, params, mip_params, "binary", build_binary_full,
                                        layer_time_limit)
    return TrainedNet(activation="binary", weights=weights, biases=biases, eps=params.eps), trace


def greedy_relu(dataset: Dataset, L: int, K: int, params: Optional[HyperParams] = None,
                mip_params: Optional[MIPParams] = None,
                layer_time_limit: Optional[float] = None) -> Tuple[TrainedNet, GreedyTrace]:
    """
    Train L ReLU hidden layers with the relaxed model, then re-train the
    output layer with the exact output-layer model on the hidden outputs of
    the kept stack.

    Returns:
        (TrainedNet, GreedyTrace) with L + 1 trace records

    Raises:
        TrainingError: When any solve finds no incumbent (trace attached)
    """
    params = params or HyperParams()
    mip_params = mip_params or MIPParams()
    weights, biases, trace, _ = _greedy(dataset, L, K, params, mip_params, "relu", build_relu_full,
                                        layer_time_limit)

    started = time.perf_counter()
    hidden_net = TrainedNet(activation="relu", weights=weights, biases=biases, eps=params.eps)
    features, _ = forward_batch(hidden_net, dataset.X)
    # exact ReLU outputs of the kept stack, not the relaxed values of the last solve
    out_data = Dataset(X=features[-1], Y=dataset.Y)
    out_arch = ArchSpec(d=K, K=1, L=0, J=dataset.J, activation="relu")
    artifact = build_output_layer(out_data, out_arch, params)
    solution = _solve(artifact, _layer_params(mip_params, L + 1, layer_time_limit), trace, L)
    out_net = extract_net(solution, artifact.index, out_arch, params)
    weights[-1], biases[-1] = out_net.weights[0], out_net.biases[0]
    net = TrainedNet(activation="relu", weights=weights, biases=biases, eps=params.eps)
    _record(trace, L, "output", solution, started, net, dataset)
    return net, trace
