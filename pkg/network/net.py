"""Trained network parameters and activation-consistent inference."""

from typing import List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from formulations.arch import ArchSpec


class TrainedNet(BaseModel):
    """
    Weights and biases per layer. weights[0] is d x K, hidden weights are
    K x K and the last matrix is K x J (d x J for a net without hidden layer).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    activation: Literal["binary", "relu"]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    eps: float = Field(default=0.01, gt=0, description="Training threshold; binary units fire at eps/2")

    @model_validator(mode="after")
    def _check_chain(self) -> "TrainedNet":
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float) for b in self.biases]
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("need one bias vector per weight matrix, at least one layer")
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {layer}: weight shape {w.shape} does not match bias shape {b.shape}")
            if layer and w.shape[0] != self.weights[layer - 1].shape[1]:
                raise ValueError(f"layer {layer} expects {w.shape[0]} inputs, previous layer has "
                                 f"{self.weights[layer - 1].shape[1]} units")
        return self

    @property
    def num_hidden(self) -> int:
        return len(self.weights) - 1

    @property
    def arch(self) -> ArchSpec:
        d = self.weights[0].shape[0]
        K = self.weights[0].shape[1] if self.num_hidden else 1
        return ArchSpec(d=d, K=K, L=self.num_hidden, J=self.weights[-1].shape[1], activation=self.activation)

    def activate(self, pre: np.ndarray) -> np.ndarray:
        if self.activation == "binary":
            return (pre >= self.eps / 2.0).astype(float)
        return np.maximum(pre, 0.0)


def forward_batch(net: TrainedNet, X: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Run every row of X through the network.

    Returns:
        (hidden activations per layer, each N x K; outputs N x J)
    """
    a = np.atleast_2d(np.asarray(X, dtype=float))
    hidden = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        a = net.activate(a @ w + b)
        hidden.append(a)
    return hidden, a @ net.weights[-1] + net.biases[-1]


def forward(net: TrainedNet, x: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """Single-row forward pass."""
    hidden, out = forward_batch(net, np.asarray(x, dtype=float)[None, :])
    return [h[0] for h in hidden], out[0]


def predict(net: TrainedNet, x: np.ndarray) -> int:
    """Argmax of the outputs; ties go to the lowest class."""
    return int(np.argmax(forward(net, x)[1]))


def predict_batch(net: TrainedNet, X: np.ndarray) -> np.ndarray:
    return np.argmax(forward_batch(net, X)[1], axis=1)


def parity_net(eps: float = 0.01) -> TrainedNet:
    """
    Hand-built binary net for the five-bit benchmark: unit k fires when
    x1 + x3 + x5 >= k, and the outputs alternate in sign over the units so the
    odd class wins exactly for an odd count.
    """
    w0 = np.zeros((5, 3))
    w0[[0, 2, 4], :] = 1.0
    b0 = -(np.arange(1, 4) - 0.5)
    w1 = np.array([[-1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]])
    b1 = np.array([0.5, 0.0])
    return TrainedNet(activation="binary", weights=[w0, w1], biases=[b0, b1], eps=eps)
