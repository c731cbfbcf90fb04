"""
공용 테스트 픽스처
"""

from unittest.mock import MagicMock

import numpy as np
import pytest

from core.domain.models import Dataset
from core.domain.problems import LeastSquaresProblem
from infra.adapters.utils.clocks import LogicalClock


def make_least_squares(n: int = 200, d: int = 20, seed: int = 0, C: float = 0.0) -> LeastSquaresProblem:
    """A ~ N(0,1)/√d, y = A w + 0.1 ε"""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d)) / np.sqrt(d)
    y = A @ rng.standard_normal(d) + 0.1 * rng.standard_normal(n)
    return LeastSquaresProblem(Dataset(features=A, labels=y), regularization_weight=C)


def make_classification(n: int = 60, p: int = 8, k: int = 2, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) / np.sqrt(p)
    labels = np.argmax(X @ rng.standard_normal((p, k)), axis=1).astype(np.int64)
    return Dataset(features=X, labels=labels, num_classes=k)


@pytest.fixture
def mock_logger():
    return MagicMock()


@pytest.fixture
def clock():
    return LogicalClock()


@pytest.fixture
def ls_problem() -> LeastSquaresProblem:
    return make_least_squares()


@pytest.fixture
def two_point_problem() -> LeastSquaresProblem:
    """d=1, n=2: f₁=½x², f₂=½(x−2)²"""
    return LeastSquaresProblem(
        Dataset(features=np.array([[1.0], [1.0]]), labels=np.array([0.0, 2.0]))
    )


@pytest.fixture
def least_squares_factory():
    return make_least_squares


@pytest.fixture
def classification_factory():
    return make_classification
