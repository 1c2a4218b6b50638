"""Plain `name value` assignment files used for external-solver round trips."""

from typing import Dict, Mapping, Optional, Sequence

from mip.errors import SolutionFileError
from mip.ir import ModelIR
from mip.mps import format_number


def read_solution_text(text: str, model: Optional[ModelIR] = None) -> Dict[str, float]:
    """
    Parse one `name value` pair per line; `#` starts a comment.

    Args:
        text: File content
        model: When given, every name must be a variable of this model

    Returns:
        Mapping of variable name to value

    Raises:
        SolutionFileError: On malformed lines, duplicate or unknown names
    """
    values: Dict[str, float] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise SolutionFileError(f"line {line_number}: expected 'name value', got {raw.strip()!r}")
        name, value = tokens
        try:
            parsed = float(value)
        except ValueError:
            raise SolutionFileError(f"line {line_number}: invalid value {value!r}") from None
        if name in values:
            raise SolutionFileError(f"line {line_number}: duplicate variable {name!r}")
        if model is not None and not model.has_var(name):
            raise SolutionFileError(f"line {line_number}: unknown variable {name!r}")
        values[name] = parsed
    return values


def write_solution_text(model: ModelIR, values: Sequence[float], header: Optional[Mapping[str, object]] = None) -> str:
    """Write every model variable as `name value`, preceded by optional `# key: value` comments."""
    if len(values) != model.num_vars:
        raise SolutionFileError(f"expected {model.num_vars} values, got {len(values)}")
    lines = [f"# {key}: {val}" for key, val in (header or {}).items()]
    lines.extend(f"{var.name} {format_number(v)}" for var, v in zip(model.vars, values))
    return "\n".join(lines) + "\n"


def values_to_vector(model: ModelIR, values: Mapping[str, float]) -> list:
    """Order a name→value mapping by variable id; every variable must be present."""
    missing = [v.name for v in model.vars if v.name not in values]
    if missing:
        raise SolutionFileError(f"solution is missing {len(missing)} variables, first {missing[0]!r}")
    return [float(values[v.name]) for v in model.vars]
