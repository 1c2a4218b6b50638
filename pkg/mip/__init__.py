from mip.branch_bound import MIPParams, MIPSolution, MIPStatus, export_node_log, solve_mip
from mip.errors import ModelError, MPSParseError, SolutionFileError, SolverError
from mip.ir import LinConstraint, ModelIR, VarSpec
from mip.lp_format import export_lp
from mip.mps import export_mps, import_mps
from mip.simplex import LPParams, LPSolution, LPStatus, solve_lp
from mip.solution_file import read_solution_text, write_solution_text

__all__ = [
    "LPParams",
    "LPSolution",
    "LPStatus",
    "LinConstraint",
    "MIPParams",
    "MIPSolution",
    "MIPStatus",
    "ModelError",
    "ModelIR",
    "MPSParseError",
    "SolutionFileError",
    "SolverError",
    "VarSpec",
    "export_lp",
    "export_mps",
    "export_node_log",
    "import_mps",
    "read_solution_text",
    "solve_lp",
    "solve_mip",
    "write_solution_text",
]
