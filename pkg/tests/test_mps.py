import math

import numpy as np
import pytest

from data.xor import Dataset, one_hot
from formulations.arch import ArchSpec, HyperParams
from formulations.binary import build_binary_full
from formulations.output_layer import build_output_layer
from formulations.relu import build_relu_full
from mip.errors import ModelError, MPSParseError, SolutionFileError
from mip.ir import ModelIR
from mip.lp_format import export_lp, lp_name
from mip.mps import export_mps, import_mps
from mip.solution_file import read_solution_text, values_to_vector, write_solution_text


def corpus():
    X = np.array([[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
    data = Dataset(X=X, Y=one_hot(np.array([0, 1, 1]), 2))
    hand = ModelIR(name="hand")
    x = hand.new_var("x", lb=-math.inf, ub=math.inf)
    y = hand.new_var("y", lb=-2.0, ub=-2.0)
    z = hand.new_var("z", lb=-math.inf, ub=3.5)
    b = hand.new_var("b", kind="binary")
    hand.new_var("unused", lb=0.0, ub=1.0)
    hand.add_row([(x, 1.0), (y, -0.1), (b, 1e-17)], "=", 0.3, name="eq")
    hand.add_row([(z, 1.0), (b, -2.0)], ">=", -1.0, name="ge")
    hand.set_objective([(x, 1.0), (z, 1.0 / 3.0)])
    return [
        hand,
        build_binary_full(data, ArchSpec(d=2, K=2, L=2, J=2)).model,
        build_relu_full(data, ArchSpec(d=2, K=2, L=1, J=2, activation="relu"), HyperParams(P=2)).model,
        build_output_layer(data, ArchSpec(d=2, K=1, L=0, J=2)).model,
    ]


class TestMPSRoundTrip:
    """import(export(m)) reproduces every model of the corpus."""

    @pytest.mark.parametrize("model", corpus(), ids=lambda m: m.name)
    def test_semantic_round_trip(self, model):
        restored = import_mps(export_mps(model))
        assert restored == model
        assert restored.name == model.name

    @pytest.mark.parametrize("model", corpus(), ids=lambda m: m.name)
    def test_export_is_deterministic(self, model):
        assert export_mps(model) == export_mps(import_mps(export_mps(model)))

    def test_binaries_inside_markers(self):
        text = export_mps(corpus()[0])
        assert "'INTORG'" in text and "'INTEND'" in text
        assert " BV BND b" in text


class TestMPSParseErrors:
    def test_missing_endata(self):
        with pytest.raises(MPSParseError, match="ENDATA"):
            import_mps("NAME m\nROWS\n N obj\n")

    def test_unknown_section_carries_line(self):
        with pytest.raises(MPSParseError) as info:
            import_mps("NAME m\nROWS\n N obj\nBOGUS\nENDATA\n")
        assert info.value.line_number == 4

    def test_bad_number(self):
        text = "NAME m\nROWS\n N obj\n L c\nCOLUMNS\n x c abc\nRHS\nBOUNDS\nENDATA\n"
        with pytest.raises(MPSParseError, match="invalid number"):
            import_mps(text)

    def test_unknown_row_in_columns(self):
        text = "NAME m\nROWS\n N obj\nCOLUMNS\n x nope 1\nENDATA\n"
        with pytest.raises(MPSParseError, match="unknown row"):
            import_mps(text)

    def test_maximize_rejected(self):
        with pytest.raises(MPSParseError, match="minimization"):
            import_mps("NAME m\nOBJSENSE\n MAX\nROWS\n N obj\nENDATA\n")


class TestLPFormat:
    def test_brackets_replaced(self):
        assert lp_name("alpha[0][1][0]") == "alpha(0)(1)(0)"
        text = export_lp(corpus()[1])
        assert "[" not in text and "]" not in text

    def test_names_colliding_after_bracket_replacement(self):
        model = ModelIR()
        a = model.new_var("h[0]")
        b = model.new_var("h(0)")
        model.set_objective([(a, 1.0), (b, 2.0)])
        with pytest.raises(ModelError, match="both export as 'h\\(0\\)'"):
            export_lp(model)

    def test_row_names_colliding_after_bracket_replacement(self):
        model = ModelIR()
        x = model.new_var("x")
        model.add_row([(x, 1.0)], "<=", 1.0, name="cap[0]")
        model.add_row([(x, 1.0)], ">=", 0.0, name="cap(0)")
        with pytest.raises(ModelError, match="constraint names"):
            export_lp(model)

    def test_sections_and_bounds(self):
        text = export_lp(corpus()[0])
        lines = text.splitlines()
        assert lines[1] == "Minimize" and lines[-1] == "End"
        assert " x free" in lines
        assert " y = -2.0" in lines
        assert " -inf <= z <= 3.5" in lines
        assert "Binaries" in lines

    def test_deterministic(self):
        model = corpus()[2]
        assert export_lp(model) == export_lp(model)


class TestSolutionFile:
    def test_round_trip(self):
        model = corpus()[0]
        values = [0.1, -2.0, 3.5, 1.0, 0.0]
        text = write_solution_text(model, values, {"status": "optimal"})
        assert text.startswith("# status: optimal")
        parsed = read_solution_text(text, model)
        assert values_to_vector(model, parsed) == values

    def test_duplicate_name(self):
        with pytest.raises(SolutionFileError, match="duplicate"):
            read_solution_text("x 1\nx 2\n")

    def test_unknown_name(self):
        with pytest.raises(SolutionFileError, match="unknown variable"):
            read_solution_text("nope 1\n", corpus()[0])

    def test_malformed_line(self):
        with pytest.raises(SolutionFileError, match="line 2"):
            read_solution_text("# comment\nx 1 2\n")

    def test_missing_values(self):
        with pytest.raises(SolutionFileError, match="missing"):
            values_to_vector(corpus()[0], {"x": 1.0})
