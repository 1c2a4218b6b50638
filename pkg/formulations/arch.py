"""Network shape and the constants the formulations leave symbolic."""

from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

Activation = Literal["binary", "relu"]


class ArchSpec(BaseModel):
    """
    Shape of a dense network. Hidden layers are 0..L-1 and layer L is the
    output layer; L = 0 is only meaningful for the output-layer model.
    """
    d: int = Field(ge=1, description="Input dimension")
    K: int = Field(ge=1, description="Units per hidden layer")
    L: int = Field(ge=0, description="Number of hidden layers")
    J: int = Field(ge=2, description="Number of classes")
    activation: Activation = Field(default="binary", description="Hidden-unit activation")


class HyperParams(BaseModel):
    """Big-M, threshold, box bounds and McCormick partitioning used by the builders."""
    M: Optional[float] = Field(default=None, gt=0, description="Big-M for every disjunction; derived per layer when unset")
    eps: float = Field(default=0.01, gt=0, description="Activation threshold and output separation")
    alpha_lb: float = Field(default=-1.0, description="Weight lower bound")
    alpha_ub: float = Field(default=1.0, description="Weight upper bound")
    beta_lb: float = Field(default=-1.0, description="Bias lower bound")
    beta_ub: float = Field(default=1.0, description="Bias upper bound")
    P: int = Field(default=4, ge=1, description="McCormick partitions per weight (ReLU only)")
    hrelu_ub: Optional[float] = Field(default=None, gt=0, description="Upper bound on ReLU outputs; derived when unset")

    @model_validator(mode="after")
    def _check_ranges(self) -> "HyperParams":
        if self.alpha_lb >= self.alpha_ub:
            raise ValueError(f"alpha_lb ({self.alpha_lb}) must be below alpha_ub ({self.alpha_ub})")
        if self.beta_lb > self.beta_ub:
            raise ValueError(f"beta_lb ({self.beta_lb}) exceeds beta_ub ({self.beta_ub})")
        if self.M is not None and self.eps >= self.M:
            raise ValueError(f"eps ({self.eps}) must be below M ({self.M})")
        return self

    @property
    def alpha_abs(self) -> float:
        return max(abs(self.alpha_lb), abs(self.alpha_ub))

    @property
    def beta_abs(self) -> float:
        return max(abs(self.beta_lb), abs(self.beta_ub))


def partition_endpoints(alpha_lb: float, alpha_ub: float, P: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split [alpha_lb, alpha_ub] into P equal pieces.

    Returns:
        (lower endpoints, upper endpoints), each of length P
    """
    if P < 1:
        raise ValueError(f"P must be at least 1, got {P}")
    width = (alpha_ub - alpha_lb) / P
    lower = alpha_lb + width * np.arange(P)
    upper = alpha_lb + width * np.arange(1, P + 1)
    upper[-1] = alpha_ub
    return lower, upper
