from training.errors import TrainingError
from training.greedy import GreedyTrace, LayerRecord, greedy_binary, greedy_relu
from training.sgd import (FloatNet, SgdConfig, gradient_check, greedy_sgd, save_loss_curve,
                          train_sgd)

__all__ = [
    "FloatNet",
    "GreedyTrace",
    "LayerRecord",
    "SgdConfig",
    "TrainingError",
    "gradient_check",
    "greedy_binary",
    "greedy_relu",
    "greedy_sgd",
    "save_loss_curve",
    "train_sgd",
]
