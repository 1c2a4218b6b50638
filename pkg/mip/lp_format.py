"""CPLEX-LP text export for ModelIR."""

import math
from typing import Dict, Iterable, List, Tuple

from mip.errors import ModelError
from mip.ir import ModelIR
from mip.mps import format_number

_TERMS_PER_LINE = 6


def lp_name(name: str) -> str:
    """CPLEX-LP forbids square brackets in names; `h[0][1][0]` becomes `h(0)(1)(0)`."""
    return name.replace("[", "(").replace("]", ")")


def _issue_names(names: Iterable[str], what: str) -> List[str]:
    """LP names in order, refusing two originals that land on the same LP name."""
    issued: Dict[str, str] = {}
    result = []
    for name in names:
        converted = lp_name(name)
        if converted in issued:
            raise ModelError(
                f"{what} names {issued[converted]!r} and {name!r} both export as {converted!r} in LP format")
        issued[converted] = name
        result.append(converted)
    return result


def _format_terms(var_names: List[str], terms: Iterable[Tuple[int, float]]) -> List[str]:
    chunks = []
    for var_id, coef in terms:
        sign = "-" if coef < 0 or (coef == 0 and math.copysign(1.0, coef) < 0) else "+"
        chunks.append(f"{sign} {format_number(abs(coef))} {var_names[var_id]}")
    return chunks


def _wrap(head: str, chunks: List[str], tail: str = "") -> List[str]:
    if not chunks:
        chunks = ["0"] if tail else []
    lines = []
    for start in range(0, max(len(chunks), 1), _TERMS_PER_LINE):
        part = " ".join(chunks[start:start + _TERMS_PER_LINE])
        lines.append(f"   {part}" if start else f" {head} {part}".rstrip())
    if tail:
        lines[-1] = f"{lines[-1]} {tail}"
    return lines


def export_lp(model: ModelIR) -> str:
    """
    Write a model in CPLEX-LP syntax (Minimize / Subject To / Bounds /
    Binaries / End). Output is deterministic for equal models.

    Args:
        model: The model to export

    Returns:
        LP text

    Raises:
        ModelError: When two variable names, or two row names, collide after
            bracket replacement
    """
    model.validate()
    var_names = _issue_names((var.name for var in model.vars), "variable")
    row_names = _issue_names((con.name for con in model.constraints), "constraint")
    lines = [f"\\ Problem: {model.name}", "Minimize"]
    lines.extend(_wrap("obj:", _format_terms(var_names, model.objective)))
    lines.append("Subject To")
    for con, row_name in zip(model.constraints, row_names):
        rhs = format_number(con.rhs)
        lines.extend(_wrap(f"{row_name}:", _format_terms(var_names, con.terms), f"{con.sense} {rhs}"))

    lines.append("Bounds")
    for var, name in zip(model.vars, var_names):
        if var.kind == "binary":
            continue
        if var.lb == -math.inf and var.ub == math.inf:
            lines.append(f" {name} free")
        elif var.lb == var.ub:
            lines.append(f" {name} = {format_number(var.lb)}")
        else:
            lower = "-inf" if var.lb == -math.inf else format_number(var.lb)
            upper = "+inf" if var.ub == math.inf else format_number(var.ub)
            lines.append(f" {lower} <= {name} <= {upper}")

    binaries = [var_names[i] for i in model.binary_ids]
    if binaries:
        lines.append("Binaries")
        for start in range(0, len(binaries), _TERMS_PER_LINE):
            lines.append(" " + " ".join(binaries[start:start + _TERMS_PER_LINE]))
    lines.append("End")
    return "\n".join(lines) + "\n"
