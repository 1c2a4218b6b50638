"""
The five-bit parity benchmark and dataset CSV persistence.

Random streams: every draw comes from a PCG64 generator seeded with
`SeedSequence(seed, spawn_key=(split, purpose))`, where split is 0 for train
and 1 for test, and purpose is 0 for feature bits and 1 for label noise.
"""

import io
import logging
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

XOR_D = 5
XOR_J = 2
PARITY_BITS = (0, 2, 4)

_SPLITS = {"train": 0, "test": 1}
_FEATURES, _NOISE = 0, 1


class DatasetError(ValueError):
    """Raised for invalid generator arguments or unreadable dataset files."""


class Dataset(BaseModel):
    """Inputs X (N x d) with one-hot labels Y (N x J)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    X: np.ndarray
    Y: np.ndarray
    seed: Optional[int] = Field(default=None, description="Generator seed, when generated")
    noise_p: Optional[float] = Field(default=None, description="Label flip probability, when generated")

    @model_validator(mode="after")
    def _check_shapes(self) -> "Dataset":
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.X.ndim != 2 or self.Y.ndim != 2:
            raise ValueError("X and Y must be matrices")
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError(f"X has {self.X.shape[0]} rows but Y has {self.Y.shape[0]}")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X contains non-finite values")
        if self.Y.size and not np.all(self.Y.sum(axis=1) == 1.0):
            raise ValueError("every Y row must sum to 1")
        return self

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def J(self) -> int:
        return self.Y.shape[1]

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.Y, axis=1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.Y, other.Y)


def _stream(seed: int, split: str, purpose: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(_SPLITS[split], purpose))))


def parity_labels(X: np.ndarray) -> np.ndarray:
    """Clean class per row: 1 when bits 1, 3 and 5 hold an odd number of ones."""
    return (np.asarray(X)[:, PARITY_BITS].sum(axis=1) % 2).astype(int)


def one_hot(labels: np.ndarray, J: int) -> np.ndarray:
    Y = np.zeros((len(labels), J))
    Y[np.arange(len(labels)), labels] = 1.0
    return Y


def gen_xor(n: int, seed: int, noise_p: float, split: Literal["train", "test"] = "train") -> Dataset:
    """
    Sample n rows uniformly with replacement from {0,1}^5 and label them by
    parity, flipping each label independently with probability noise_p.

    Args:
        n: Number of rows
        seed: Experiment seed
        noise_p: Label flip probability in [0, 0.5)
        split: Which stream family to draw from

    Returns:
        Dataset

    Raises:
        DatasetError: On n < 1, noise_p outside [0, 0.5) or an unknown split
    """
    if n < 1:
        raise DatasetError(f"n must be at least 1, got {n}")
    if not 0.0 <= noise_p < 0.5:
        raise DatasetError(f"noise_p must be in [0, 0.5), got {noise_p}")
    if split not in _SPLITS:
        raise DatasetError(f"unknown split {split!r}")
    X = _stream(seed, split, _FEATURES).integers(0, 2, size=(n, XOR_D)).astype(float)
    labels = parity_labels(X)
    flips = _stream(seed, split, _NOISE).random(n) < noise_p
    labels = np.where(flips, 1 - labels, labels)
    logger.debug(f"generated {split} XOR set: n={n} seed={seed} noise_p={noise_p} flipped={int(flips.sum())}")
    return Dataset(X=X, Y=one_hot(labels, XOR_J), seed=seed, noise_p=noise_p)


def save_csv(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write `x1..xd,y0..y{J-1}` with a header row and round-trip precision."""
    columns = [f"x{i + 1}" for i in range(dataset.d)] + [f"y{j}" for j in range(dataset.J)]
    frame = pd.DataFrame(np.hstack([dataset.X, dataset.Y]), columns=columns)
    frame.to_csv(path, index=False, float_format="%.17g")


def load_csv(path: Union[str, Path]) -> Dataset:
    """
    Read a dataset written by save_csv.

    Raises:
        DatasetError: On an empty file, malformed rows, a wrong column count
            or labels that are not one-hot
    """
    text = Path(path).read_text()
    if not text.strip():
        raise DatasetError(f"{path}: file is empty")
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=float)
    except (pd.errors.ParserError, ValueError) as e:
        raise DatasetError(f"{path}: malformed row: {e}") from None

    x_cols = [c for c in frame.columns if c.startswith("x")]
    y_cols = [c for c in frame.columns if c.startswith("y")]
    expected = [f"x{i + 1}" for i in range(len(x_cols))] + [f"y{j}" for j in range(len(y_cols))]
    if list(frame.columns) != expected or not x_cols or len(y_cols) < 2:
        raise DatasetError(f"{path}: header must be x1..xd,y0..yJ-1, got {list(frame.columns)}")
    if frame.empty:
        raise DatasetError(f"{path}: no data rows")
    if frame.isna().any().any():
        row = int(np.flatnonzero(frame.isna().any(axis=1).to_numpy())[0])
        raise DatasetError(f"{path}: row {row + 1} has a wrong column count or missing value")

    X = frame[x_cols].to_numpy()
    Y = frame[y_cols].to_numpy()
    one_hot_rows = np.all((Y == 0.0) | (Y == 1.0), axis=1) & (Y.sum(axis=1) == 1.0)
    if not np.all(one_hot_rows):
        row = int(np.flatnonzero(~one_hot_rows)[0])
        raise DatasetError(f"{path}: label row {row + 1} is not one-hot: {Y[row].tolist()}")
    return Dataset(X=X, Y=Y)
