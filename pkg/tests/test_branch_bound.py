import itertools
import math

import numpy as np
import pytest
from conftest import enumerable_datasets, random_dataset

from formulations.arch import ArchSpec
from formulations.binary import build_binary_full
from mip.branch_bound import MIPParams, MIPStatus, export_node_log, relative_gap, solve_mip
from mip.ir import ModelIR
from mip.simplex import LPStatus, solve_lp

EXACT = MIPParams(rel_gap=0.0)


def enumerate_optimum(model: ModelIR) -> float:
    """Fix every binary pattern, solve the LP, keep the best objective."""
    binaries = model.binary_ids
    best = math.inf
    for pattern in itertools.product((0.0, 1.0), repeat=len(binaries)):
        result = solve_lp(model, overrides={b: (v, v) for b, v in zip(binaries, pattern)})
        if result.status == LPStatus.OPTIMAL:
            best = min(best, result.objective)
    return best


def knapsack() -> ModelIR:
    model = ModelIR(name="knapsack")
    values, weights = [6.0, 5.0, 4.0, 3.0], [4.0, 3.0, 2.0, 2.0]
    ids = [model.new_var(f"b{i}", kind="binary") for i in range(4)]
    model.add_row(list(zip(ids, weights)), "<=", 6.0, name="cap")
    model.set_objective([(i, -v) for i, v in zip(ids, values)])
    return model


class TestBruteForceOracle:
    """Binary training models small enough to enumerate."""

    def test_objective_matches_enumeration(self):
        for data in enumerable_datasets():
            artifact = build_binary_full(data, ArchSpec(d=2, K=1, L=1, J=2))
            assert len(artifact.model.binary_ids) <= 12
            solution = solve_mip(artifact.model, EXACT)
            expected = enumerate_optimum(artifact.model)
            assert solution.status == MIPStatus.OPTIMAL
            assert solution.objective == pytest.approx(expected, abs=1e-6)
            assert artifact.model.max_violation(solution.incumbent, binary_tol=1e-6) <= 1e-6

    def test_knapsack(self):
        solution = solve_mip(knapsack(), EXACT)
        assert solution.status == MIPStatus.OPTIMAL
        assert solution.objective == pytest.approx(enumerate_optimum(knapsack()))
        assert solution.objective == pytest.approx(-10.0)


class TestSearchOptions:
    def test_pruning_off_gives_same_optimum(self):
        model = knapsack()
        assert solve_mip(model, MIPParams(rel_gap=0.0, prune=False)).objective == pytest.approx(-10.0)

    def test_threads_give_same_optimum(self, rng):
        data = random_dataset(rng, N=3, d=2)
        model = build_binary_full(data, ArchSpec(d=2, K=1, L=1, J=2)).model
        single = solve_mip(model, EXACT)
        threaded = solve_mip(model, MIPParams(rel_gap=0.0, threads=2))
        assert threaded.objective == pytest.approx(single.objective, abs=1e-6)

    def test_warm_start_installed(self):
        model = knapsack()
        warm = [0.0, 1.0, 0.0, 1.0]
        solution = solve_mip(model, EXACT, warm_start=warm)
        assert solution.objective == pytest.approx(-10.0)
        assert solution.node_log[0].incumbent <= -8.0

    def test_node_log_csv(self):
        solution = solve_mip(knapsack(), EXACT)
        lines = export_node_log(solution).splitlines()
        assert lines[0] == "node,depth,bound,incumbent,gap"
        assert len(lines) == len(solution.node_log) + 1
        assert solution.node_log[-1].gap == pytest.approx(solution.gap)

    def test_last_row_carries_final_bound(self):
        for data in enumerable_datasets(3):
            model = build_binary_full(data, ArchSpec(d=2, K=1, L=1, J=2)).model
            solution = solve_mip(model, EXACT)
            assert solution.node_log[-1].bound == solution.best_bound
            last = export_node_log(solution).splitlines()[-1].split(",")
            assert float(last[2]) == solution.best_bound
            assert float(last[3]) == solution.objective


class TestStatuses:
    def test_no_binaries_returns_lp(self):
        model = ModelIR()
        x = model.new_var("x", lb=1.0, ub=3.0)
        model.set_objective([(x, 2.0)])
        solution = solve_mip(model)
        assert solution.status == MIPStatus.OPTIMAL
        assert solution.objective == pytest.approx(2.0)

    def test_infeasible(self):
        model = ModelIR()
        b = model.new_var("b", kind="binary")
        c = model.new_var("c", kind="binary")
        model.add_row([(b, 1.0), (c, 1.0)], ">=", 3.0, name="too_many")
        model.set_objective([(b, 1.0)])
        solution = solve_mip(model)
        assert solution.status == MIPStatus.INFEASIBLE
        assert not solution.has_incumbent

    def test_integer_infeasible_after_branching(self):
        model = ModelIR()
        b = model.new_var("b", kind="binary")
        c = model.new_var("c", kind="binary")
        model.add_row([(b, 2.0), (c, 2.0)], "=", 1.0, name="half")
        model.set_objective([(b, 1.0)])
        assert solve_mip(model).status == MIPStatus.INFEASIBLE

    def test_unbounded_root(self):
        model = ModelIR()
        x = model.new_var("x", lb=-math.inf, ub=math.inf)
        b = model.new_var("b", kind="binary")
        model.add_row([(x, 1.0), (b, 1.0)], "<=", 5.0, name="cap")
        model.set_objective([(x, 1.0)])
        assert solve_mip(model).status == MIPStatus.UNBOUNDED


class TestRelativeGap:
    def test_values(self):
        assert relative_gap(10.0, 9.0) == pytest.approx(0.1)
        assert relative_gap(0.5, 0.0) == pytest.approx(0.5)
        assert relative_gap(math.inf, 0.0) == math.inf
        assert relative_gap(1.0, 2.0) == 0.0
