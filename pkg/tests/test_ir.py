import math

import numpy as np
import pytest

from mip.errors import ModelError
from mip.ir import LinConstraint, ModelIR, VarSpec


def small_model() -> ModelIR:
    model = ModelIR(name="small")
    x = model.new_var("x", lb=0.0, ub=4.0)
    y = model.new_var("y", kind="binary")
    model.add_row([(x, 1.0), (y, 2.0)], "<=", 5.0, name="cap")
    model.add_row([(x, 1.0)], ">=", 1.0, name="floor")
    model.set_objective([(x, -1.0), (y, -3.0)])
    return model


class TestModelConstruction:
    """Validation performed while a model is assembled."""

    def test_duplicate_variable_name(self):
        model = ModelIR()
        model.new_var("x")
        with pytest.raises(ModelError, match="duplicate variable"):
            model.new_var("x")

    @pytest.mark.parametrize("name", ["", "x a", "x\ty", " x"])
    def test_rejects_names_mps_cannot_carry(self, name):
        with pytest.raises(ModelError, match="invalid variable name"):
            ModelIR().new_var(name)

    def test_rejects_row_name_with_whitespace(self):
        model = ModelIR()
        x = model.new_var("x")
        with pytest.raises(ModelError, match="invalid constraint name"):
            model.add_row([(x, 1.0)], "<=", 1.0, name="cap x")

    def test_inverted_bounds(self):
        with pytest.raises(ModelError, match="inverted bounds"):
            ModelIR().new_var("x", lb=2.0, ub=1.0)

    def test_unknown_var_id_in_row(self):
        model = ModelIR()
        model.new_var("x")
        with pytest.raises(ModelError, match="unknown var id"):
            model.add_constraint(LinConstraint(terms=[(3, 1.0)], sense="<=", rhs=1.0))

    def test_non_finite_coefficient(self):
        model = ModelIR()
        x = model.new_var("x")
        with pytest.raises(ModelError, match="non-finite"):
            model.add_row([(x, math.inf)], "<=", 1.0)

    def test_binary_bounds_forced(self):
        spec = VarSpec(name="b", kind="binary", lb=-5.0, ub=7.0)
        assert (spec.lb, spec.ub) == (0.0, 1.0)

    def test_add_row_merges_repeated_ids(self):
        model = ModelIR()
        x = model.new_var("x")
        model.add_row([(x, 1.0), (x, 2.0)], "<=", 3.0, name="r")
        assert model.constraints[0].terms == [(x, 3.0)]

    def test_unnamed_rows_get_index_names(self):
        model = ModelIR()
        x = model.new_var("x")
        model.add_row([(x, 1.0)], "<=", 1.0)
        assert model.constraints[0].name == "c0"


class TestModelQueries:
    def test_stats(self):
        stats = small_model().stats()
        assert (stats.variables, stats.binaries, stats.constraints, stats.nonzeros) == (2, 1, 2, 3)

    def test_empty_objective_is_a_warning(self):
        model = ModelIR(name="flat")
        model.new_var("x")
        warnings = model.validate()
        assert len(warnings) == 1 and "empty objective" in warnings[0]

    def test_freeze_blocks_edits(self):
        model = small_model().freeze()
        assert model.frozen
        with pytest.raises(ModelError, match="frozen"):
            model.new_var("z")

    def test_evaluate_and_violation(self):
        model = small_model()
        assert model.evaluate_objective([1.0, 1.0]) == pytest.approx(-4.0)
        assert model.max_violation([1.0, 1.0]) == 0.0
        # cap row: 4 + 2 = 6 > 5
        assert model.max_violation([4.0, 1.0]) == pytest.approx(1.0)
        assert model.max_violation([1.0, 0.4], binary_tol=1e-6) == pytest.approx(0.4)

    def test_equality_ignores_name(self):
        a, b = small_model(), small_model()
        b.name = "other"
        assert a == b
        np.testing.assert_array_equal(a.objective_vector(), [-1.0, -3.0])
