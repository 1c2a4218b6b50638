"""Canonical variable naming shared by the builders, extraction and solution files."""

import math
import re
from typing import Dict, Iterator, List, Tuple

from formulations.errors import FormulationError
from mip.ir import ModelIR, VarKind

ROLES = ("alpha", "beta", "h", "hrelu", "z", "omega", "r", "lambda")

_NAME_PATTERN = re.compile(r"^([a-z]+)((?:\[\d+\])+)$")

Key = Tuple[str, Tuple[int, ...]]


def var_name(role: str, *index: int) -> str:
    """`var_name("alpha", 0, 1, 0)` -> `alpha[0][1][0]`."""
    return role + "".join(f"[{int(i)}]" for i in index)


def parse_var_name(name: str) -> Key:
    """
    Inverse of var_name.

    Raises:
        FormulationError: If the name does not follow the role[i][j]... scheme
    """
    match = _NAME_PATTERN.match(name)
    if match is None or match.group(1) not in ROLES:
        raise FormulationError(f"not a formulation variable name: {name!r}")
    index = tuple(int(part) for part in re.findall(r"\[(\d+)\]", match.group(2)))
    return match.group(1), index


class VarIndex:
    """Bijection between (role, index tuple) and model variable ids."""

    def __init__(self):
        self._ids: Dict[Key, int] = {}
        self._keys: List[Key] = []

    def add(self, model: ModelIR, role: str, index: Tuple[int, ...], kind: VarKind = "continuous",
            lb: float = 0.0, ub: float = math.inf) -> int:
        """Declare the variable in `model` and record its key."""
        if role not in ROLES:
            raise FormulationError(f"unknown variable role {role!r}")
        var_id = model.new_var(var_name(role, *index), kind=kind, lb=lb, ub=ub)
        key = (role, tuple(int(i) for i in index))
        self._ids[key] = var_id
        if var_id != len(self._keys):
            raise FormulationError("VarIndex must see every variable of its model in order")
        self._keys.append(key)
        return var_id

    def id(self, role: str, *index: int) -> int:
        try:
            return self._ids[(role, tuple(index))]
        except KeyError:
            raise FormulationError(f"no variable {var_name(role, *index)}") from None

    def has(self, role: str, *index: int) -> bool:
        return (role, tuple(index)) in self._ids

    def key(self, var_id: int) -> Key:
        return self._keys[var_id]

    def ids(self, role: str) -> List[int]:
        return [i for i, (r, _) in enumerate(self._keys) if r == role]

    def count(self, role: str) -> int:
        return sum(1 for r, _ in self._keys if r == role)

    def __len__(self) -> int:
        return len(self._keys)

    def __iter__(self) -> Iterator[Tuple[Key, int]]:
        return ((key, i) for i, key in enumerate(self._keys))

    @classmethod
    def from_model(cls, model: ModelIR) -> "VarIndex":
        """Rebuild the index of an imported model from its variable names."""
        index = cls()
        for var_id, var in enumerate(model.vars):
            key = parse_var_name(var.name)
            index._ids[key] = var_id
            index._keys.append(key)
        return index
