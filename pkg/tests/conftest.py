from typing import List

import numpy as np
import pytest

from data.xor import Dataset, one_hot


def random_dataset(rng: np.random.Generator, N: int, d: int, J: int = 2) -> Dataset:
    X = rng.integers(0, 2, size=(N, d)).astype(float)
    return Dataset(X=X, Y=one_hot(rng.integers(0, J, size=N), J))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_dataset() -> Dataset:
    """Two rows, two features, two classes."""
    return Dataset(X=np.array([[0.0, 1.0], [1.0, 0.0]]), Y=np.array([[1.0, 0.0], [0.0, 1.0]]))


def enumerable_datasets(count: int = 10) -> List[Dataset]:
    """Three-row, two-feature binary datasets whose K=1, L=1 models have few enough binaries to enumerate."""
    rng = np.random.default_rng(2024)
    return [random_dataset(rng, N=3, d=2) for _ in range(count)]
