"""
SyntheticDatasetAdapter 단위 테스트
"""

import numpy as np
import pytest

from core.domain.errors import InvalidInputError
from core.domain.models import SyntheticSpec
from infra.adapters.data.synthetic_dataset_adapter import SyntheticDatasetAdapter


@pytest.fixture
def adapter():
    return SyntheticDatasetAdapter()


class TestSyntheticDatasetAdapter:
    def test_same_spec_same_bits(self, adapter):
        spec = SyntheticSpec(n=40, p=6, num_classes=3, noise=0.2, seed=11)
        a, b = adapter.generate(spec), adapter.generate(spec)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_seed_changes_data(self, adapter):
        a = adapter.generate(SyntheticSpec(n=40, p=6, seed=0))
        b = adapter.generate(SyntheticSpec(n=40, p=6, seed=1))
        assert not np.array_equal(a.features, b.features)

    def test_classification_labels(self, adapter):
        data = adapter.generate(SyntheticSpec(n=200, p=5, num_classes=4, seed=3))
        assert data.num_classes == 4
        assert data.labels.dtype == np.int64
        assert set(np.unique(data.labels)) <= {0, 1, 2, 3}

    def test_noise_free_classes_are_separable(self, adapter):
        spec = SyntheticSpec(n=100, p=5, num_classes=3, noise=0.0, seed=2)
        data = adapter.generate(spec)
        weights = np.random.default_rng(spec.seed).standard_normal((spec.p, spec.num_classes))
        np.testing.assert_array_equal(np.argmax(data.features @ weights, axis=1), data.labels)

    def test_regression_targets(self, adapter):
        data = adapter.generate(SyntheticSpec(n=30, p=4, task="regression", noise=0.0, seed=5))
        assert data.num_classes is None
        assert data.labels.dtype == np.float64
        w_star = np.linalg.lstsq(data.features, data.labels, rcond=None)[0]
        np.testing.assert_allclose(data.features @ w_star, data.labels, atol=1e-10)

    def test_bundle_splits_train_then_test(self, adapter):
        spec = SyntheticSpec(n=20, p=3, seed=4, num_test=7)
        bundle = adapter.generate_bundle(spec)
        assert bundle.train.n == 20
        assert bundle.test is not None and bundle.test.n == 7
        # 학습 부분은 테스트 분할 여부와 무관하게 같은 행
        no_test = adapter.generate_bundle(SyntheticSpec(n=20, p=3, seed=4))
        assert no_test.test is None
        np.testing.assert_array_equal(bundle.train.features, no_test.train.features)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(n=0, p=3), dict(n=3, p=0), dict(n=3, p=3, task="ranking"), dict(n=3, p=3, num_classes=1)],
    )
    def test_invalid_spec(self, kwargs):
        with pytest.raises(InvalidInputError):
            SyntheticSpec(**kwargs)
