"""
Mini-batch SGD baseline with hand-written backpropagation.

The loss is the mean soft-max negative log likelihood. Binary units use a
straight-through estimator: the forward pass is 1[z >= 0] and the backward
pass lets the gradient through where |z| <= 1.
"""

import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import logsumexp, softmax

from data.xor import Dataset
from formulations.arch import ArchSpec
from network.net import TrainedNet
from training.errors import TrainingError

logger = logging.getLogger(__name__)

SgdActivation = Literal["relu", "binary_ste"]


class SgdConfig(BaseModel):
    """Baseline optimizer settings."""
    epochs: int = Field(default=10_000, ge=1, description="Passes over the training set")
    learning_rate: float = Field(default=0.1, ge=0, description="Constant step size; 0 freezes the parameters")
    batch_size: int = Field(default=32, ge=1, description="Rows per update")
    seed: int = Field(default=0, description="Seed for initialization and shuffling")
    activation: SgdActivation = Field(default="relu", description="Hidden-unit activation")
    init: Literal["random_uniform", "warm_start"] = Field(default="random_uniform", description="Initialization")
    init_scale: float = Field(default=0.5, gt=0, description="Uniform init range [-scale, scale]")


class FloatNet(BaseModel):
    """Unbounded real-valued parameters with the same layer chain as TrainedNet."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    activation: SgdActivation
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @model_validator(mode="after")
    def _check_chain(self) -> "FloatNet":
        self.weights = [np.array(w, dtype=float) for w in self.weights]
        self.biases = [np.array(b, dtype=float) for b in self.biases]
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("need one bias vector per weight matrix, at least one layer")
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {layer}: weight shape {w.shape} does not match bias shape {b.shape}")
            if layer and w.shape[0] != self.weights[layer - 1].shape[1]:
                raise ValueError(f"layer {layer} input size does not match the previous layer")
        return self

    def copy_net(self) -> "FloatNet":
        return FloatNet(activation=self.activation, weights=[w.copy() for w in self.weights],
                        biases=[b.copy() for b in self.biases])

    def to_trained_net(self, eps: float = 0.01) -> TrainedNet:
        """Equivalent TrainedNet; binary hidden biases move up by eps/2 to match its eps/2 threshold."""
        if self.activation == "relu":
            return TrainedNet(activation="relu", weights=self.weights, biases=self.biases, eps=eps)
        biases = [b + eps / 2.0 for b in self.biases[:-1]] + [self.biases[-1]]
        return TrainedNet(activation="binary", weights=self.weights, biases=biases, eps=eps)

    @classmethod
    def from_trained_net(cls, net: TrainedNet) -> "FloatNet":
        """Inverse of to_trained_net: same forward pass under the SGD activations."""
        if net.activation == "relu":
            return cls(activation="relu", weights=net.weights, biases=net.biases)
        biases = [b - net.eps / 2.0 for b in net.biases[:-1]] + [net.biases[-1]]
        return cls(activation="binary_ste", weights=net.weights, biases=biases)


def init_net(arch: ArchSpec, activation: SgdActivation, rng: np.random.Generator, scale: float = 0.5) -> FloatNet:
    sizes = [arch.d] + [arch.K] * arch.L + [arch.J]
    weights = [rng.uniform(-scale, scale, size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    biases = [rng.uniform(-scale, scale, size=b) for b in sizes[1:]]
    return FloatNet(activation=activation, weights=weights, biases=biases)


def _activate(net: FloatNet, z: np.ndarray) -> np.ndarray:
    if net.activation == "relu":
        return np.maximum(z, 0.0)
    return (z >= 0.0).astype(float)


def _activation_grad(net: FloatNet, z: np.ndarray) -> np.ndarray:
    if net.activation == "relu":
        return (z > 0.0).astype(float)
    return (np.abs(z) <= 1.0).astype(float)


def float_forward(net: FloatNet, X: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray], np.ndarray]:
    """Returns (pre-activations, activations including the input, outputs)."""
    activations = [np.asarray(X, dtype=float)]
    pre = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = activations[-1] @ w + b
        pre.append(z)
        activations.append(_activate(net, z))
    return pre, activations, activations[-1] @ net.weights[-1] + net.biases[-1]


def mean_nll(net: FloatNet, X: np.ndarray, Y: np.ndarray) -> float:
    _, _, out = float_forward(net, X)
    labels = np.argmax(Y, axis=1)
    return float(np.mean(logsumexp(out, axis=1) - out[np.arange(len(labels)), labels]))


def backprop(net: FloatNet, X: np.ndarray, Y: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Gradients of the mean NLL with respect to every weight and bias."""
    pre, activations, out = float_forward(net, X)
    delta = (softmax(out, axis=1) - Y) / X.shape[0]
    grad_w = [np.zeros_like(w) for w in net.weights]
    grad_b = [np.zeros_like(b) for b in net.biases]
    for layer in range(len(net.weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ net.weights[layer].T) * _activation_grad(net, pre[layer - 1])
    return grad_w, grad_b


def train_sgd(dataset: Dataset, arch: ArchSpec, config: Optional[SgdConfig] = None,
              warm_start: Optional[Union[TrainedNet, FloatNet]] = None) -> Tuple[FloatNet, np.ndarray]:
    """
    Minimize the mean soft-max NLL by mini-batch gradient descent.

    Args:
        dataset: Training set
        arch: Network shape (its activation field is ignored; config decides)
        config: Optimizer settings
        warm_start: Initial parameters, required when config.init is warm_start

    Returns:
        (trained net, loss curve); curve[0] is the loss before any update and
        curve[e] the loss after epoch e. A diverged run returns the curve up
        to and including the first non-finite loss.

    Raises:
        TrainingError: On a missing or mismatched warm start
    """
    config = config or SgdConfig()
    rng = np.random.default_rng(config.seed)
    if config.init == "warm_start" or warm_start is not None:
        if warm_start is None:
            raise TrainingError("init is warm_start but no network was given")
        net = warm_start.copy_net() if isinstance(warm_start, FloatNet) else FloatNet.from_trained_net(warm_start)
        if net.activation != config.activation:
            raise TrainingError(f"warm start is {net.activation} but config trains {config.activation}")
        if net.weights[0].shape[0] != dataset.d or net.weights[-1].shape[1] != dataset.J:
            raise TrainingError("warm start shape does not match the dataset")
    else:
        net = init_net(arch, config.activation, rng, config.init_scale)

    X, Y = dataset.X, dataset.Y
    curve = [mean_nll(net, X, Y)]
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(dataset.n)
        for start in range(0, dataset.n, config.batch_size):
            rows = order[start:start + config.batch_size]
            grad_w, grad_b = backprop(net, X[rows], Y[rows])
            for layer in range(len(net.weights)):
                net.weights[layer] -= config.learning_rate * grad_w[layer]
                net.biases[layer] -= config.learning_rate * grad_b[layer]
        curve.append(mean_nll(net, X, Y))
        if not np.isfinite(curve[-1]):
            logger.error(f"SGD diverged at epoch {epoch} (loss {curve[-1]})")
            break
    logger.info(f"SGD {config.activation}: {len(curve) - 1} epochs, loss {curve[0]:.4f} -> {curve[-1]:.4f}")
    return net, np.array(curve)


def greedy_sgd(dataset: Dataset, L: int, K: int, config: Optional[SgdConfig] = None,
               layer_inputs: Optional[List[np.ndarray]] = None) -> FloatNet:
    """
    Layer-wise SGD: each iteration trains a one-hidden-layer net on the
    frozen activations of the layers kept so far.

    Args:
        dataset: Training set
        L: Hidden layers (>= 1)
        K: Units per layer
        config: Optimizer settings; iteration l uses seed + l
        layer_inputs: When given, receives the input matrix of every iteration

    Returns:
        The stacked FloatNet
    """
    config = config or SgdConfig()
    if L < 1:
        raise TrainingError(f"greedy training needs L >= 1, got {L}")
    weights, biases = [], []
    inputs = dataset.X
    for layer in range(L):
        if layer_inputs is not None:
            layer_inputs.append(inputs)
        arch = ArchSpec(d=inputs.shape[1], K=K, L=1, J=dataset.J)
        layer_config = config.model_copy(update={"seed": config.seed + layer, "init": "random_uniform"})
        sub, curve = train_sgd(Dataset(X=inputs, Y=dataset.Y), arch, layer_config)
        if not np.isfinite(curve[-1]):
            raise TrainingError(f"layer {layer} diverged")
        weights.append(sub.weights[0])
        biases.append(sub.biases[0])
        inputs = _activate(sub, inputs @ sub.weights[0] + sub.biases[0])
        output = (sub.weights[1], sub.biases[1])
    return FloatNet(activation=config.activation, weights=weights + [output[0]], biases=biases + [output[1]])


def gradient_check(net: FloatNet, X: np.ndarray, Y: np.ndarray, step: float = 1e-5) -> float:
    """
    Largest relative difference between backprop and central differences
    over all parameters, |a - n| / max(|a| + |n|, 1e-4).

    Raises:
        TrainingError: For binary_ste nets, whose backward pass is a surrogate
    """
    if net.activation != "relu":
        raise TrainingError("gradient_check needs a relu net")
    probe = net.copy_net()
    grad_w, grad_b = backprop(probe, X, Y)
    worst = 0.0
    for params, grads in ((probe.weights, grad_w), (probe.biases, grad_b)):
        for p, g in zip(params, grads):
            flat, gflat = p.reshape(-1), g.reshape(-1)
            for i in range(flat.size):
                saved = flat[i]
                flat[i] = saved + step
                up = mean_nll(probe, X, Y)
                flat[i] = saved - step
                down = mean_nll(probe, X, Y)
                flat[i] = saved
                numeric = (up - down) / (2 * step)
                err = abs(gflat[i] - numeric) / max(abs(gflat[i]) + abs(numeric), 1e-4)
                worst = max(worst, err)
    return worst


def save_loss_curve(curve: np.ndarray, path: Union[str, Path]) -> None:
    pd.DataFrame({"epoch": np.arange(len(curve)), "loss": curve}).to_csv(path, index=False, float_format="%.17g")
