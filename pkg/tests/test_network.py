import itertools

import numpy as np
import pytest
from conftest import enumerable_datasets, random_dataset

from data.xor import Dataset, gen_xor, one_hot, parity_labels
from formulations.arch import ArchSpec, HyperParams
from formulations.binary import build_binary_full
from mip.branch_bound import MIPParams, MIPSolution, MIPStatus, solve_mip
from network.errors import EvaluationError, ExtractionError, NetFormatError
from network.evaluate import evaluate
from network.extract import extract_activations, extract_net
from network.net import TrainedNet, forward, forward_batch, parity_net, predict
from network.serialize import dumps_net, load_net, loads_net, save_net


def all_inputs() -> np.ndarray:
    return np.array(list(itertools.product((0.0, 1.0), repeat=5)))


class TestParityNet:
    def test_classifies_every_input(self):
        X = all_inputs()
        report = evaluate(parity_net(), Dataset(X=X, Y=one_hot(parity_labels(X), 2)))
        assert report.accuracy == 1.0
        assert report.n == 32
        assert report.confusion == [[16, 0], [0, 16]]

    def test_noisy_test_set(self):
        data = gen_xor(250, seed=0, noise_p=0.1, split="test")
        accuracy = evaluate(parity_net(), data).accuracy
        assert accuracy == pytest.approx(np.mean(data.labels == parity_labels(data.X)))
        assert abs(accuracy - 0.9) <= 0.08

    def test_single_row_forward(self):
        hidden, out = forward(parity_net(), np.array([1.0, 0.0, 1.0, 0.0, 1.0]))
        np.testing.assert_array_equal(hidden[0], [1.0, 1.0, 1.0])
        assert predict(parity_net(), np.array([1.0, 0.0, 1.0, 0.0, 1.0])) == 1
        assert out.shape == (2,)

    def test_threshold_is_half_eps(self):
        net = TrainedNet(activation="binary", weights=[np.ones((1, 1)), np.ones((1, 2))],
                         biases=[np.zeros(1), np.zeros(2)], eps=0.1)
        hidden, _ = forward_batch(net, np.array([[0.049], [0.05]]))
        np.testing.assert_array_equal(hidden[0][:, 0], [0.0, 1.0])


class TestTrainedNet:
    def test_arch_of_output_only_net(self):
        net = TrainedNet(activation="relu", weights=[np.zeros((3, 2))], biases=[np.zeros(2)])
        assert net.arch == ArchSpec(d=3, K=1, L=0, J=2, activation="relu")

    def test_rejects_broken_chain(self):
        with pytest.raises(ValueError, match="expects 4 inputs"):
            TrainedNet(activation="relu", weights=[np.zeros((2, 3)), np.zeros((4, 2))],
                       biases=[np.zeros(3), np.zeros(2)])


class TestSerialize:
    def test_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        net = TrainedNet(activation="relu", weights=[rng.normal(size=(4, 3)), rng.normal(size=(3, 2))],
                         biases=[rng.normal(size=3), rng.normal(size=2)], eps=0.02)
        save_net(net, tmp_path / "net.txt")
        loaded = load_net(tmp_path / "net.txt")
        assert loaded.activation == "relu" and loaded.eps == 0.02
        for a, b in zip(net.weights + net.biases, loaded.weights + loaded.biases):
            np.testing.assert_array_equal(a, b)

    def test_header_required(self):
        with pytest.raises(NetFormatError, match="not a network file") as info:
            loads_net("something else\n")
        assert info.value.line_number == 1

    def test_truncated_file(self):
        text = "\n".join(dumps_net(parity_net()).splitlines()[:6])
        with pytest.raises(NetFormatError, match="unexpected end of file"):
            loads_net(text)

    def test_bad_number_reports_line(self):
        lines = dumps_net(parity_net()).splitlines()
        lines[5] = "1 0 abc"
        with pytest.raises(NetFormatError, match="invalid number") as info:
            loads_net("\n".join(lines))
        assert info.value.line_number == 6

    def test_unknown_activation(self):
        text = dumps_net(parity_net()).replace("activation binary", "activation tanh")
        with pytest.raises(NetFormatError, match="unknown activation"):
            loads_net(text)

    def test_trailing_content(self):
        with pytest.raises(NetFormatError, match="trailing"):
            loads_net(dumps_net(parity_net()) + "1 2 3\n")


class TestExtraction:
    """Networks read from solved binary models reproduce the solved unit values."""

    @pytest.mark.parametrize("seed,N,K,L", [(0, 4, 2, 1), (1, 3, 1, 2), (2, 4, 1, 1)])
    def test_forward_reproduces_solution(self, seed, N, K, L):
        data = random_dataset(np.random.default_rng(seed), N=N, d=2)
        arch = ArchSpec(d=2, K=K, L=L, J=2)
        params = HyperParams()
        artifact = build_binary_full(data, arch, params)
        solution = solve_mip(artifact.model, MIPParams(rel_gap=0.0))
        assert solution.status == MIPStatus.OPTIMAL

        net = extract_net(solution, artifact.index, arch, params)
        mip_hidden, mip_out = extract_activations(solution, artifact.index, arch, N)
        hidden, out = forward_batch(net, data.X)
        for layer in range(L):
            np.testing.assert_allclose(hidden[layer], np.round(mip_hidden[layer]), atol=1e-6)
        np.testing.assert_allclose(out, mip_out, atol=1e-6)

    def test_every_enumerable_instance(self):
        arch = ArchSpec(d=2, K=1, L=1, J=2)
        params = HyperParams()
        for data in enumerable_datasets():
            artifact = build_binary_full(data, arch, params)
            solution = solve_mip(artifact.model, MIPParams(rel_gap=0.0))
            assert solution.status == MIPStatus.OPTIMAL
            net = extract_net(solution, artifact.index, arch, params)
            mip_hidden, mip_out = extract_activations(solution, artifact.index, arch, data.n)
            hidden, out = forward_batch(net, data.X)
            np.testing.assert_array_equal(hidden[0], np.round(mip_hidden[0]))
            np.testing.assert_allclose(out, mip_out, atol=1e-6)

    def test_no_incumbent(self):
        artifact = build_binary_full(random_dataset(np.random.default_rng(0), N=2, d=2),
                                     ArchSpec(d=2, K=1, L=1, J=2))
        with pytest.raises(ExtractionError, match="no incumbent"):
            extract_net(MIPSolution(status=MIPStatus.NO_SOLUTION_LIMIT), artifact.index,
                        ArchSpec(d=2, K=1, L=1, J=2), HyperParams())

    def test_out_of_bounds_weight(self):
        arch = ArchSpec(d=2, K=1, L=1, J=2)
        artifact = build_binary_full(random_dataset(np.random.default_rng(0), N=2, d=2), arch)
        values = np.zeros(artifact.model.num_vars)
        values[artifact.index.id("alpha", 0, 0, 0)] = 1.5
        with pytest.raises(ExtractionError, match="outside"):
            extract_net(values, artifact.index, arch, HyperParams())

    def test_clamps_within_tolerance(self):
        arch = ArchSpec(d=2, K=1, L=1, J=2)
        artifact = build_binary_full(random_dataset(np.random.default_rng(0), N=2, d=2), arch)
        values = np.zeros(artifact.model.num_vars)
        values[artifact.index.id("alpha", 0, 0, 0)] = 1.0 + 5e-7
        net = extract_net(values, artifact.index, arch, HyperParams())
        assert net.weights[0][0, 0] == 1.0

    def test_short_vector(self):
        arch = ArchSpec(d=2, K=1, L=1, J=2)
        artifact = build_binary_full(random_dataset(np.random.default_rng(0), N=2, d=2), arch)
        with pytest.raises(ExtractionError, match="no value"):
            extract_net(np.zeros(3), artifact.index, arch, HyperParams())


class TestEvaluate:
    def test_confusion_counts(self):
        net = TrainedNet(activation="relu", weights=[np.array([[1.0, -1.0]])], biases=[np.zeros(2)])
        X = np.array([[1.0], [2.0], [-1.0], [-3.0], [0.5]])
        Y = one_hot(np.array([0, 1, 1, 1, 0]), 2)
        report = evaluate(net, Dataset(X=X, Y=Y))
        assert report.confusion == [[2, 0], [1, 2]]
        assert report.accuracy == pytest.approx(0.8)

    def test_shape_mismatch(self):
        with pytest.raises(EvaluationError, match="dataset is"):
            evaluate(parity_net(), Dataset(X=np.zeros((2, 3)), Y=one_hot(np.array([0, 1]), 2)))

    def test_empty_dataset(self):
        with pytest.raises(EvaluationError, match="empty"):
            evaluate(parity_net(), Dataset(X=np.zeros((0, 5)), Y=np.zeros((0, 2))))
