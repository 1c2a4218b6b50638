"""Solver-agnostic mixed-integer linear program representation."""

import logging
import math
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from mip.errors import ModelError

logger = logging.getLogger(__name__)

VarKind = Literal["continuous", "binary"]
Sense = Literal["<=", "=", ">="]


class VarSpec(BaseModel):
    """A decision variable declaration."""
    name: str = Field(description="Unique variable name, e.g. alpha[0][1][0]")
    kind: VarKind = Field(default="continuous", description="Variable domain")
    lb: float = Field(default=0.0, description="Lower bound (may be -inf)")
    ub: float = Field(default=math.inf, description="Upper bound (may be +inf)")

    @model_validator(mode="before")
    @classmethod
    def _force_binary_bounds(cls, data):
        if isinstance(data, dict) and data.get("kind") == "binary":
            data = {**data, "lb": 0.0, "ub": 1.0}
        return data


class LinConstraint(BaseModel):
    """A linear row `sum(coef * var) sense rhs`."""
    terms: List[Tuple[int, float]] = Field(default_factory=list, description="(var id, coefficient) pairs")
    sense: Sense = Field(description="Row sense")
    rhs: float = Field(default=0.0, description="Right-hand side")
    name: str = Field(default="", description="Row name; assigned c<index> when empty")


def _check_name(name: str, what: str) -> None:
    # MPS records are whitespace-delimited
    if not name or any(ch.isspace() for ch in name):
        raise ModelError(f"invalid {what} name {name!r}: must be non-empty without whitespace")


class ModelStats(BaseModel):
    """Size summary of a model."""
    variables: int
    binaries: int
    constraints: int
    nonzeros: int


class ModelIR:
    """
    An ordered collection of variables, linear constraints and a linear
    objective that is always minimized.

    Variable ids are dense indices in insertion order. Constraint order is part
    of the model identity, so two models built the same way export to
    byte-identical text.
    """

    def __init__(self, name: str = "mipnet"):
        self.name = name
        self.vars: List[VarSpec] = []
        self.constraints: List[LinConstraint] = []
        self.objective: List[Tuple[int, float]] = []
        self._var_ids: Dict[str, int] = {}
        self._con_names: Dict[str, int] = {}
        self._frozen = False

    # -- construction ---------------------------------------------------

    def add_var(self, spec: VarSpec) -> int:
        """
        Append a variable.

        Args:
            spec: Variable declaration

        Returns:
            The new variable id

        Raises:
            ModelError: On an empty or blank-containing name, a duplicate name,
                NaN bound or inverted bounds
        """
        self._check_mutable()
        _check_name(spec.name, "variable")
        if spec.name in self._var_ids:
            raise ModelError(f"duplicate variable name {spec.name!r}")
        if math.isnan(spec.lb) or math.isnan(spec.ub):
            raise ModelError(f"NaN bound on variable {spec.name!r}")
        if spec.lb > spec.ub:
            raise ModelError(f"inverted bounds on variable {spec.name!r}: lb={spec.lb} > ub={spec.ub}")
        var_id = len(self.vars)
        self.vars.append(spec)
        self._var_ids[spec.name] = var_id
        return var_id

    def new_var(self, name: str, kind: VarKind = "continuous", lb: float = 0.0, ub: float = math.inf) -> int:
        """Shorthand for `add_var(VarSpec(...))`."""
        return self.add_var(VarSpec(name=name, kind=kind, lb=lb, ub=ub))

    def add_constraint(self, constraint: LinConstraint) -> int:
        """
        Append a constraint. Terms are stored sorted by variable id.

        Args:
            constraint: The row to add

        Returns:
            The new constraint id

        Raises:
            ModelError: On an unknown var id, repeated var id, non-finite
                coefficient or rhs, or a duplicate or blank-containing row name
        """
        self._check_mutable()
        if constraint.name:
            _check_name(constraint.name, "constraint")
        n_vars = len(self.vars)
        seen = set()
        for var_id, coef in constraint.terms:
            if not 0 <= var_id < n_vars:
                raise ModelError(f"constraint {constraint.name!r} references unknown var id {var_id}")
            if var_id in seen:
                raise ModelError(f"constraint {constraint.name!r} repeats var id {var_id}")
            if not math.isfinite(coef):
                raise ModelError(f"non-finite coefficient {coef} on var id {var_id} in constraint {constraint.name!r}")
            seen.add(var_id)
        if not math.isfinite(constraint.rhs):
            raise ModelError(f"non-finite rhs {constraint.rhs} in constraint {constraint.name!r}")

        con_id = len(self.constraints)
        name = constraint.name or f"c{con_id}"
        if name in self._con_names:
            raise ModelError(f"duplicate constraint name {name!r}")
        stored = LinConstraint(
            terms=sorted((int(v), float(c)) for v, c in constraint.terms),
            sense=constraint.sense,
            rhs=float(constraint.rhs),
            name=name,
        )
        self.constraints.append(stored)
        self._con_names[name] = con_id
        return con_id

    def add_row(self, terms: Iterable[Tuple[int, float]], sense: Sense, rhs: float, name: str = "") -> int:
        """Shorthand for `add_constraint(LinConstraint(...))` that merges repeated var ids."""
        merged: Dict[int, float] = {}
        for var_id, coef in terms:
            merged[var_id] = merged.get(var_id, 0.0) + coef
        return self.add_constraint(LinConstraint(terms=list(merged.items()), sense=sense, rhs=rhs, name=name))

    def set_objective(self, terms: Iterable[Tuple[int, float]]) -> None:
        """
        Replace the (minimized) objective. Repeated ids are summed and zero
        coefficients dropped.

        Raises:
            ModelError: On an unknown var id or non-finite coefficient
        """
        self._check_mutable()
        merged: Dict[int, float] = {}
        for var_id, coef in terms:
            if not 0 <= var_id < len(self.vars):
                raise ModelError(f"objective references unknown var id {var_id}")
            if not math.isfinite(coef):
                raise ModelError(f"non-finite objective coefficient on var id {var_id}")
            merged[var_id] = merged.get(var_id, 0.0) + float(coef)
        self.objective = sorted((v, c) for v, c in merged.items() if c != 0.0)

    def _check_mutable(self) -> None:
        if self._frozen:
            raise ModelError(f"model {self.name!r} is frozen")

    # -- queries --------------------------------------------------------

    def var_id(self, name: str) -> int:
        """Return the id of a named variable."""
        try:
            return self._var_ids[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def has_var(self, name: str) -> bool:
        return name in self._var_ids

    @property
    def num_vars(self) -> int:
        return len(self.vars)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def binary_ids(self) -> List[int]:
        return [i for i, v in enumerate(self.vars) if v.kind == "binary"]

    @property
    def frozen(self) -> bool:
        return self._frozen

    def lower_bounds(self) -> np.ndarray:
        return np.array([v.lb for v in self.vars], dtype=float)

    def upper_bounds(self) -> np.ndarray:
        return np.array([v.ub for v in self.vars], dtype=float)

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(len(self.vars))
        for var_id, coef in self.objective:
            c[var_id] = coef
        return c

    def stats(self) -> ModelStats:
        return ModelStats(
            variables=len(self.vars),
            binaries=len(self.binary_ids),
            constraints=len(self.constraints),
            nonzeros=sum(len(c.terms) for c in self.constraints),
        )

    def validate(self) -> List[str]:
        """
        Check model-wide invariants.

        Returns:
            Warnings (an empty objective is reported here, not raised)

        Raises:
            ModelError: If any referenced var id is missing
        """
        n_vars = len(self.vars)
        for con in self.constraints:
            for var_id, _ in con.terms:
                if not 0 <= var_id < n_vars:
                    raise ModelError(f"constraint {con.name!r} references unknown var id {var_id}")
        for var_id, _ in self.objective:
            if not 0 <= var_id < n_vars:
                raise ModelError(f"objective references unknown var id {var_id}")
        warnings = []
        if not self.objective:
            warnings.append(f"model {self.name!r} has an empty objective")
            logger.warning(warnings[-1])
        return warnings

    def freeze(self) -> "ModelIR":
        """Validate and make the model read-only."""
        self.validate()
        self._frozen = True
        return self

    # -- evaluation -----------------------------------------------------

    def evaluate_objective(self, values: Sequence[float]) -> float:
        return float(sum(coef * values[var_id] for var_id, coef in self.objective))

    def row_activities(self, values: Sequence[float]) -> np.ndarray:
        return np.array([sum(coef * values[v] for v, coef in con.terms) for con in self.constraints], dtype=float)

    def max_violation(self, values: Sequence[float], binary_tol: Optional[float] = None) -> float:
        """
        Largest absolute violation of any row or bound by `values`. When
        `binary_tol` is given, binaries further than that from 0/1 count as
        violations of their distance to the nearest integer.
        """
        values = np.asarray(values, dtype=float)
        worst = 0.0
        activity = self.row_activities(values)
        for con, act in zip(self.constraints, activity):
            if con.sense == "<=":
                worst = max(worst, act - con.rhs)
            elif con.sense == ">=":
                worst = max(worst, con.rhs - act)
            else:
                worst = max(worst, abs(act - con.rhs))
        if len(self.vars):
            worst = max(worst, float(np.max(self.lower_bounds() - values)), float(np.max(values - self.upper_bounds())))
        if binary_tol is not None:
            for var_id in self.binary_ids:
                frac = abs(values[var_id] - round(values[var_id]))
                if frac > binary_tol:
                    worst = max(worst, frac)
        return max(worst, 0.0)

    # -- identity -------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelIR):
            return NotImplemented
        return (
            self.vars == other.vars
            and self.constraints == other.constraints
            and self.objective == other.objective
        )

    def __repr__(self) -> str:
        s = self.stats()
        return f"ModelIR(name={self.name!r}, vars={s.variables}, binaries={s.binaries}, constraints={s.constraints})"
