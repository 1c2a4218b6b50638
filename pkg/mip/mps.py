"""Free-format MPS export and import for ModelIR."""

import logging
import math
from typing import Dict, List, Optional, Tuple

from mip.errors import MPSParseError
from mip.ir import LinConstraint, ModelIR, VarSpec

logger = logging.getLogger(__name__)

_ROW_TYPES = {"<=": "L", "=": "E", ">=": "G"}
_ROW_SENSES = {"L": "<=", "E": "=", "G": ">="}
_SECTIONS = {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA", "OBJSENSE", "RANGES", "SOS", "QUADOBJ"}


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly the same float."""
    return repr(float(value))


def _objective_row_name(model: ModelIR) -> str:
    names = {c.name for c in model.constraints}
    name = "obj"
    while name in names:
        name += "_"
    return name


def export_mps(model: ModelIR) -> str:
    """
    Write a model as free-format MPS (minimize sense).

    Equal models always produce byte-identical text: columns follow variable
    order, row entries follow constraint order, and consecutive binaries share
    one INTORG/INTEND marker block.

    Args:
        model: The model to export

    Returns:
        MPS text terminated by ENDATA
    """
    model.validate()
    obj_row = _objective_row_name(model)
    lines = [f"NAME {model.name}", "ROWS", f" N {obj_row}"]
    for con in model.constraints:
        lines.append(f" {_ROW_TYPES[con.sense]} {con.name}")

    column_entries: List[List[Tuple[str, float]]] = [[] for _ in model.vars]
    for var_id, coef in model.objective:
        column_entries[var_id].append((obj_row, coef))
    for con in model.constraints:
        for var_id, coef in con.terms:
            column_entries[var_id].append((con.name, coef))

    lines.append("COLUMNS")
    in_marker = False
    marker_count = 0
    for var, entries in zip(model.vars, column_entries):
        is_binary = var.kind == "binary"
        if is_binary and not in_marker:
            lines.append(f" MARKER{marker_count:04d} 'MARKER' 'INTORG'")
            marker_count += 1
            in_marker = True
        elif not is_binary and in_marker:
            lines.append(f" MARKER{marker_count:04d} 'MARKER' 'INTEND'")
            marker_count += 1
            in_marker = False
        if not entries:
            # declare the column even when it appears nowhere else
            entries = [(obj_row, 0.0)]
        for row, coef in entries:
            lines.append(f" {var.name} {row} {format_number(coef)}")
    if in_marker:
        lines.append(f" MARKER{marker_count:04d} 'MARKER' 'INTEND'")

    lines.append("RHS")
    for con in model.constraints:
        if con.rhs != 0.0:
            lines.append(f" RHS {con.name} {format_number(con.rhs)}")

    lines.append("BOUNDS")
    for var in model.vars:
        lines.extend(_bound_lines(var))
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def _bound_lines(var: VarSpec) -> List[str]:
    if var.kind == "binary":
        return [f" BV BND {var.name}"]
    if var.lb == var.ub:
        return [f" FX BND {var.name} {format_number(var.lb)}"]
    if var.lb == -math.inf and var.ub == math.inf:
        return [f" FR BND {var.name}"]
    out = []
    if var.lb == -math.inf:
        out.append(f" MI BND {var.name}")
    else:
        out.append(f" LO BND {var.name} {format_number(var.lb)}")
    if var.ub != math.inf:
        out.append(f" UP BND {var.name} {format_number(var.ub)}")
    return out


class _ColumnState:
    def __init__(self, integer: bool):
        self.integer = integer
        self.lb = 0.0
        self.ub = math.inf
        self.bounded = False
        self.binary = False


def import_mps(text: str, name: Optional[str] = None) -> ModelIR:
    """
    Parse free-format MPS into a ModelIR.

    Args:
        text: MPS content
        name: Optional model name override (defaults to the NAME record)

    Returns:
        The parsed model; variable order is first appearance in COLUMNS and
        constraint order is ROWS order

    Raises:
        MPSParseError: On malformed records, unknown sections, unsupported
            features or a missing ENDATA record
    """
    model_name = "mipnet"
    section: Optional[str] = None
    obj_row: Optional[str] = None
    row_order: List[str] = []
    row_sense: Dict[str, str] = {}
    row_terms: Dict[str, Dict[str, float]] = {}
    rhs: Dict[str, float] = {}
    objective: Dict[str, float] = {}
    columns: Dict[str, _ColumnState] = {}
    in_marker = False
    ended = False

    for line_number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        tokens = raw.split()
        if not raw[0].isspace():
            keyword = tokens[0].upper()
            if keyword not in _SECTIONS:
                raise MPSParseError(f"unknown section {tokens[0]!r}", line_number)
            if keyword == "NAME":
                model_name = tokens[1] if len(tokens) > 1 else model_name
                section = "NAME"
            elif keyword == "ENDATA":
                ended = True
                break
            elif keyword == "OBJSENSE":
                section = "OBJSENSE"
                if len(tokens) > 1 and tokens[1].upper() not in ("MIN", "MINIMIZE"):
                    raise MPSParseError("only minimization models are supported", line_number)
            elif keyword in ("RANGES", "SOS", "QUADOBJ"):
                raise MPSParseError(f"section {keyword} is not supported", line_number)
            else:
                section = keyword
            continue

        if section == "OBJSENSE":
            if tokens[0].upper() not in ("MIN", "MINIMIZE"):
                raise MPSParseError("only minimization models are supported", line_number)
        elif section == "ROWS":
            if len(tokens) != 2:
                raise MPSParseError(f"ROWS record needs 2 fields, got {len(tokens)}", line_number)
            kind, row = tokens[0].upper(), tokens[1]
            if kind == "N":
                if obj_row is not None:
                    raise MPSParseError(f"second objective row {row!r}", line_number)
                obj_row = row
            elif kind in _ROW_SENSES:
                if row in row_sense:
                    raise MPSParseError(f"duplicate row {row!r}", line_number)
                row_order.append(row)
                row_sense[row] = _ROW_SENSES[kind]
                row_terms[row] = {}
            else:
                raise MPSParseError(f"unknown row type {tokens[0]!r}", line_number)
        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].strip("'\"").upper() == "MARKER":
                marker = tokens[2].strip("'\"").upper()
                if marker == "INTORG":
                    in_marker = True
                elif marker == "INTEND":
                    in_marker = False
                else:
                    raise MPSParseError(f"unknown marker {tokens[2]!r}", line_number)
                continue
            if len(tokens) not in (3, 5):
                raise MPSParseError(f"COLUMNS record needs 3 or 5 fields, got {len(tokens)}", line_number)
            col = tokens[0]
            if col not in columns:
                columns[col] = _ColumnState(integer=in_marker)
            for row, value in zip(tokens[1::2], tokens[2::2]):
                coef = _parse_float(value, line_number)
                if row == obj_row:
                    if coef != 0.0:
                        objective[col] = coef
                elif row in row_terms:
                    row_terms[row][col] = coef
                else:
                    raise MPSParseError(f"unknown row {row!r}", line_number)
        elif section == "RHS":
            if len(tokens) not in (3, 5):
                raise MPSParseError(f"RHS record needs 3 or 5 fields, got {len(tokens)}", line_number)
            for row, value in zip(tokens[1::2], tokens[2::2]):
                val = _parse_float(value, line_number)
                if row == obj_row:
                    logger.warning(f"ignoring objective constant {val} on line {line_number}")
                elif row in row_sense:
                    rhs[row] = val
                else:
                    raise MPSParseError(f"unknown row {row!r}", line_number)
        elif section == "BOUNDS":
            _parse_bound(tokens, columns, line_number)
        else:
            raise MPSParseError(f"record outside of a section: {raw.strip()!r}", line_number)

    if not ended:
        raise MPSParseError("missing ENDATA record")

    model = ModelIR(name=name or model_name)
    for col, state in columns.items():
        if state.integer or state.binary:
            # integer columns without explicit bounds are read as binaries
            if not (state.binary or not state.bounded or (state.lb == 0.0 and state.ub == 1.0)):
                raise MPSParseError(f"general integer variable {col!r} is not supported")
            model.new_var(col, kind="binary")
        else:
            model.new_var(col, kind="continuous", lb=state.lb, ub=state.ub)
    for row in row_order:
        terms = [(model.var_id(col), coef) for col, coef in row_terms[row].items()]
        model.add_constraint(LinConstraint(terms=terms, sense=row_sense[row], rhs=rhs.get(row, 0.0), name=row))
    model.set_objective((model.var_id(col), coef) for col, coef in objective.items())
    return model


def _parse_float(token: str, line_number: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MPSParseError(f"invalid number {token!r}", line_number) from None
    if math.isnan(value):
        raise MPSParseError("NaN is not a valid coefficient", line_number)
    return value


def _parse_bound(tokens: List[str], columns: Dict[str, _ColumnState], line_number: int) -> None:
    kind = tokens[0].upper()
    needs_value = kind in ("LO", "UP", "FX", "LI", "UI")
    expected = 4 if needs_value else 3
    if len(tokens) != expected:
        raise MPSParseError(f"{kind} bound needs {expected} fields, got {len(tokens)}", line_number)
    col = tokens[2]
    if col not in columns:
        raise MPSParseError(f"bound on unknown column {col!r}", line_number)
    state = columns[col]
    value = _parse_float(tokens[3], line_number) if needs_value else None
    state.bounded = True
    if kind in ("LO", "LI"):
        state.lb = value
    elif kind in ("UP", "UI"):
        state.ub = value
    elif kind == "FX":
        state.lb = state.ub = value
    elif kind == "FR":
        state.lb, state.ub = -math.inf, math.inf
    elif kind == "MI":
        state.lb = -math.inf
    elif kind == "PL":
        state.ub = math.inf
    elif kind == "BV":
        state.binary = True
        state.lb, state.ub = 0.0, 1.0
    else:
        raise MPSParseError(f"unknown bound type {tokens[0]!r}", line_number)
