"""Closed-form variable and row counts of the three models."""

from collections import Counter
from math import comb
from typing import Dict

from pydantic import BaseModel

from mip.ir import ModelIR


class Census(BaseModel):
    variables: Dict[str, int]
    constraints: Dict[str, int]
    binaries: int

    @property
    def total_variables(self) -> int:
        return sum(self.variables.values())

    @property
    def total_constraints(self) -> int:
        return sum(self.constraints.values())


def _loss_part(N: int, J: int) -> Dict[str, int]:
    return {"out": N * J, "omega": N * J, "div": 2 * N * comb(J, 2)}


def binary_census(N: int, d: int, K: int, L: int, J: int) -> Census:
    products = N * K * K * (L - 1) + N * K * J
    return Census(
        variables={
            "alpha": d * K + K * K * (L - 1) + K * J,
            "beta": K * L + J,
            "h": N * K * L + N * J,
            "z": products,
            "omega": N,
            "r": N * comb(J, 2),
        },
        constraints={"gate": 2 * N * K * L, "link": 4 * products, **_loss_part(N, J)},
        binaries=N * K * L + N * comb(J, 2),
    )


def relu_census(N: int, d: int, K: int, L: int, J: int, P: int) -> Census:
    products = N * K * K * (L - 1) + N * K * J
    pairs = K * K * (L - 1) + K * J
    return Census(
        variables={
            "alpha": d * K + K * K * (L - 1) + K * J,
            "beta": K * L + J,
            "h": N * K * L + N * J,
            "hrelu": N * K * L,
            "z": products,
            "lambda": P * pairs,
            "omega": N,
            "r": N * comb(J, 2),
        },
        constraints={"gate": 6 * N * K * L, "mc": 4 * P * products, "part": 3 * pairs, **_loss_part(N, J)},
        binaries=N * K * L + P * pairs + N * comb(J, 2),
    )


def output_census(N: int, d: int, J: int) -> Census:
    return Census(
        variables={"alpha": d * J, "beta": J, "h": N * J, "omega": N, "r": N * comb(J, 2)},
        constraints=_loss_part(N, J),
        binaries=N * comb(J, 2),
    )


def count_families(model: ModelIR) -> Dict[str, int]:
    """Row counts grouped by name family (the part before the first '_' or '[')."""
    return dict(Counter(c.name.split("[", 1)[0].split("_", 1)[0] for c in model.constraints))
