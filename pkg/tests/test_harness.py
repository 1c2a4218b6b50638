import math

import pandas as pd
import pytest
from pydantic import ValidationError

from experiments.harness import (DEFAULT_ARMS, ExperimentConfig, ExperimentRunner, ResultRow, append_results,
                                 config_hash, run_cell)
from formulations.arch import HyperParams
from mip.branch_bound import MIPParams
from mip.errors import SolverError
from training.sgd import SgdConfig

QUICK_SGD = SgdConfig(epochs=5)


def row(arm: str, layers: int, seed: int, accuracy) -> ResultRow:
    return ResultRow(arm=arm, layers=layers, units=5, seed=seed, test_accuracy=accuracy,
                     status="completed" if accuracy is not None else "no_solution_limit")


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.arms == list(DEFAULT_ARMS)
        assert config.sizes() == [(1, 5), (2, 5), (3, 5), (4, 5), (5, 5)]
        assert config.largest_size == 5
        assert config.sweep_field == "layers"

    def test_width_sweep(self):
        config = ExperimentConfig(mode="width_sweep", width_max=3)
        assert config.sizes() == [(3, 1), (3, 2), (3, 3)]
        assert config.sweep_field == "units"
        assert config.largest_size == 3

    def test_single(self):
        assert ExperimentConfig(mode="single", single_layers=2, fixed_units=4).sizes() == [(2, 4)]

    @pytest.mark.parametrize("kwargs", [
        {"arms": ["gradient_boosting"]},
        {"arms": []},
        {"seeds": []},
        {"depth_min": 4, "depth_max": 2},
        {"width_min": 3, "width_max": 1},
        {"noise_p": 0.5},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            ExperimentConfig(**kwargs)

    def test_extra_arms_are_allowed(self):
        assert ExperimentConfig(arms=["relu_mip", "greedy_relu_mip"]).arms == ["relu_mip", "greedy_relu_mip"]


class TestRunner:
    def test_cells_cover_the_grid(self):
        config = ExperimentConfig(arms=["relu_sgd", "binary_sgd"], depth_max=2, seeds=[0, 1])
        cells = ExperimentRunner(config).cells()
        assert len(cells) == 2 * 2 * 2
        assert cells[0] == ("relu_sgd", 1, 5, 0)
        assert cells[-1] == ("binary_sgd", 2, 5, 1)

    def test_summary_minimum_size(self):
        config = ExperimentConfig(arms=["relu_sgd", "binary_sgd", "relu_greedy_sgd"], depth_max=3, seeds=[0, 1])
        rows = [
            row("relu_sgd", 1, 0, 0.9), row("relu_sgd", 1, 1, 0.7),
            row("relu_sgd", 2, 0, 0.9), row("relu_sgd", 2, 1, 0.9),
            row("relu_sgd", 3, 0, 0.5), row("relu_sgd", 3, 1, 0.5),
            row("binary_sgd", 1, 0, 0.5), row("binary_sgd", 2, 0, 0.6),
            row("relu_greedy_sgd", 1, 0, None), row("relu_greedy_sgd", 2, 0, None),
        ]
        summary = ExperimentRunner(config).summarize(rows)
        assert summary == {"relu_sgd": "2", "binary_sgd": ">3", "relu_greedy_sgd": "NaN"}

    def test_size_with_missing_network_does_not_qualify(self):
        config = ExperimentConfig(arms=["binary_mip"], depth_max=2, seeds=[0, 1])
        rows = [row("binary_mip", 1, 0, 1.0), row("binary_mip", 1, 1, None),
                row("binary_mip", 2, 0, 0.9), row("binary_mip", 2, 1, 0.9)]
        assert ExperimentRunner(config).summarize(rows) == {"binary_mip": "2"}

    def test_render_summary(self):
        config = ExperimentConfig(arms=["relu_sgd"], depth_max=2)
        runner = ExperimentRunner(config)
        text = runner.render_summary({"relu_sgd": ">2"})
        assert "| relu_sgd | >2 |" in text
        assert runner.digest in text
        assert "85%" in text

    def test_hash_ignores_workers(self):
        base = ExperimentConfig(arms=["relu_sgd"])
        parallel = base.model_copy(update={"workers": 4})
        digest = config_hash(base, HyperParams(), MIPParams(), SgdConfig())
        assert digest == config_hash(parallel, HyperParams(), MIPParams(), SgdConfig())
        assert digest != config_hash(base, HyperParams(eps=0.02), MIPParams(), SgdConfig())
        assert len(digest) == 12


class TestRunCell:
    def test_sgd_cell_is_deterministic(self):
        config = ExperimentConfig(arms=["relu_sgd"], n_train=16, n_test=8, seeds=[3])
        args = (config, HyperParams(), MIPParams(), QUICK_SGD, "abc")
        first = run_cell(("relu_sgd", 1, 2, 3), *args)
        second = run_cell(("relu_sgd", 1, 2, 3), *args)
        assert first.status == "completed"
        assert first.test_accuracy == second.test_accuracy
        assert first.objective == second.objective
        assert math.isnan(first.gap)
        assert first.config_hash == "abc"

    def test_greedy_sgd_cell(self):
        config = ExperimentConfig(arms=["greedy_binary_sgd"], n_train=16, n_test=8)
        result = run_cell(("greedy_binary_sgd", 2, 2, 0), config, HyperParams(), MIPParams(), QUICK_SGD, "h")
        assert result.status == "completed"
        assert 0.0 <= result.test_accuracy <= 1.0

    def test_binary_mip_cell(self):
        config = ExperimentConfig(arms=["binary_mip"], n_train=3, n_test=8, solve_time_limit=60.0)
        result = run_cell(("binary_mip", 1, 1, 0), config, HyperParams(), MIPParams(), QUICK_SGD, "h")
        assert result.status == "optimal"
        assert result.test_accuracy is not None
        assert result.gap <= 1e-4

    @pytest.mark.parametrize("arm,target", [("greedy_binary_mip", "greedy_binary"), ("binary_mip", "solve_mip")])
    def test_solver_failure_records_failed_row(self, monkeypatch, arm, target):
        def broken(*args, **kwargs):
            raise SolverError("basis matrix is singular")

        monkeypatch.setattr(f"experiments.harness.{target}", broken)
        config = ExperimentConfig(arms=[arm], n_train=3, n_test=8)
        result = run_cell((arm, 1, 1, 0), config, HyperParams(), MIPParams(), QUICK_SGD, "h")
        assert result.status == "failed"
        assert result.test_accuracy is None


class TestAppendResults:
    def test_header_written_once(self, tmp_path):
        path = tmp_path / "results.csv"
        append_results([row("relu_sgd", 1, 0, 0.5)], path)
        append_results([row("relu_sgd", 2, 0, 0.75), row("relu_sgd", 3, 0, None)], path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("arm,layers,units,seed,test_accuracy")
        assert sum(line.startswith("arm,") for line in lines) == 1
        frame = pd.read_csv(path)
        assert list(frame["layers"]) == [1, 2, 3]
        assert frame["test_accuracy"].isna().tolist() == [False, False, True]
