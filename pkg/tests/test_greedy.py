import numpy as np
import pytest
from conftest import random_dataset

from data.xor import gen_xor
from formulations.arch import ArchSpec, HyperParams
from formulations.binary import build_binary_full
from mip.branch_bound import MIPParams, solve_mip
from network.evaluate import evaluate
from network.net import forward_batch
from training.errors import TrainingError
from training.greedy import greedy_binary, greedy_relu

EXACT = MIPParams(rel_gap=0.0)


class TestGreedyBinary:
    def test_single_layer_matches_full_model(self):
        data = random_dataset(np.random.default_rng(8), N=4, d=2)
        net, trace = greedy_binary(data, L=1, K=1, mip_params=EXACT)
        full = solve_mip(build_binary_full(data, ArchSpec(d=2, K=1, L=1, J=2)).model, EXACT)
        assert len(trace.records) == 1
        assert trace.records[0].objective == pytest.approx(full.objective, abs=1e-6)
        assert net.num_hidden == 1

    def test_stacked_layers_feed_forward_activations(self):
        data = random_dataset(np.random.default_rng(4), N=3, d=2)
        net, trace = greedy_binary(data, L=2, K=1, mip_params=EXACT)
        assert [r.layer for r in trace.records] == [0, 1]
        assert all(r.kind == "binary" for r in trace.records)
        assert len(trace.layer_inputs) == 2
        np.testing.assert_array_equal(trace.layer_inputs[0], data.X)
        hidden, _ = forward_batch(net, data.X)
        np.testing.assert_array_equal(trace.layer_inputs[1], hidden[0])
        assert trace.records[-1].train_accuracy == evaluate(net, data).accuracy

    def test_trace_frame(self, tmp_path):
        data = random_dataset(np.random.default_rng(5), N=3, d=2)
        _, trace = greedy_binary(data, L=1, K=1, mip_params=EXACT)
        trace.to_csv(tmp_path / "trace.csv")
        header = (tmp_path / "trace.csv").read_text().splitlines()[0]
        assert header == "layer,kind,status,objective,gap,nodes,wall_time,train_accuracy"

    def test_rejects_zero_layers(self):
        data = random_dataset(np.random.default_rng(0), N=2, d=2)
        with pytest.raises(TrainingError, match="L >= 1"):
            greedy_binary(data, L=0, K=1)


class TestGreedyRelu:
    def test_output_layer_is_retrained(self):
        data = random_dataset(np.random.default_rng(6), N=3, d=2)
        net, trace = greedy_relu(data, L=1, K=1, params=HyperParams(P=1), mip_params=EXACT)
        assert [r.kind for r in trace.records] == ["relu", "output"]
        assert [r.layer for r in trace.records] == [0, 1]
        assert net.activation == "relu"
        assert trace.records[-1].train_accuracy == evaluate(net, data).accuracy


@pytest.mark.slow
class TestScaledBenchmark:
    """Greedy binary MIP on the scaled five-bit parity benchmark."""

    def test_one_layer_five_units_accuracy(self):
        accuracies = []
        for seed in range(3):
            train = gen_xor(200, seed, 0.1, split="train")
            test = gen_xor(100, seed, 0.1, split="test")
            net, _ = greedy_binary(train, L=1, K=5, mip_params=MIPParams(time_limit=300.0))
            accuracies.append(evaluate(net, test).accuracy)
        assert np.mean(accuracies) >= 0.85

    def test_second_layer_does_not_improve(self):
        train = gen_xor(200, 0, 0.1, split="train")
        _, trace = greedy_binary(train, L=2, K=5, mip_params=MIPParams(time_limit=600.0))
        first, second = trace.records
        assert second.objective >= first.objective - 1e-6
