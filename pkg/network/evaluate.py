"""Accuracy and confusion counts of a network on a labeled set."""

import logging
from typing import List

import numpy as np
from pydantic import BaseModel, Field

from data.xor import Dataset
from network.errors import EvaluationError
from network.net import TrainedNet, predict_batch

logger = logging.getLogger(__name__)


class EvalReport(BaseModel):
    accuracy: float = Field(ge=0.0, le=1.0, description="Fraction of rows whose argmax matches the label")
    confusion: List[List[int]] = Field(description="confusion[true][predicted] counts")
    n: int = Field(description="Rows evaluated")


def evaluate(net: TrainedNet, dataset: Dataset) -> EvalReport:
    """
    Score argmax predictions against the one-hot labels.

    Raises:
        EvaluationError: On an empty dataset or a shape mismatch
    """
    if dataset.n == 0:
        raise EvaluationError("cannot evaluate on an empty dataset")
    if dataset.d != net.weights[0].shape[0] or dataset.J != net.weights[-1].shape[1]:
        raise EvaluationError(f"dataset is {dataset.d} -> {dataset.J} but the net is "
                              f"{net.weights[0].shape[0]} -> {net.weights[-1].shape[1]}")
    predicted = predict_batch(net, dataset.X)
    truth = dataset.labels
    confusion = np.zeros((dataset.J, dataset.J), dtype=int)
    np.add.at(confusion, (truth, predicted), 1)
    accuracy = float(np.mean(predicted == truth))
    logger.debug(f"evaluated {dataset.n} rows: accuracy {accuracy:.4f}")
    return EvalReport(accuracy=accuracy, confusion=confusion.tolist(), n=dataset.n)
