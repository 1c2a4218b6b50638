from network.errors import EvaluationError, ExtractionError, NetFormatError
from network.evaluate import EvalReport, evaluate
from network.extract import extract_activations, extract_net
from network.net import TrainedNet, forward, forward_batch, parity_net, predict, predict_batch
from network.serialize import dumps_net, load_net, loads_net, save_net

__all__ = [
    "EvalReport",
    "EvaluationError",
    "ExtractionError",
    "NetFormatError",
    "TrainedNet",
    "dumps_net",
    "evaluate",
    "extract_activations",
    "extract_net",
    "forward",
    "forward_batch",
    "load_net",
    "loads_net",
    "parity_net",
    "predict",
    "predict_batch",
    "save_net",
]
