"""
합성 데이터 생성 어댑터
"""

import numpy as np

from core.domain.models import Dataset, DatasetBundle, SyntheticSpec
from core.ports.data_ports import SyntheticGeneratorPort


class SyntheticDatasetAdapter(SyntheticGeneratorPort):
    """
    시드 고정 합성 데이터

    생성 순서 (같은 spec 이면 비트 단위로 같은 결과):
        1. 정답 모델 (분류: p×k 가중치 W, 회귀: w*)
        2. 특성 A ~ N(0, 1)/√p, 학습 n 행 다음에 테스트 num_test 행
        3. 노이즈 (분류: 점수에, 회귀: 타깃에)
    noise=0 인 분류 데이터는 W 로 완전히 분리된다.
    """

    def _draw(self, spec: SyntheticSpec) -> Dataset:
        rng = np.random.default_rng(spec.seed)
        total = spec.n + spec.num_test

        if spec.task == "classification":
            weights = rng.standard_normal((spec.p, spec.num_classes))
            features = rng.standard_normal((total, spec.p)) / np.sqrt(spec.p)
            scores = features @ weights
            if spec.noise > 0:
                scores = scores + spec.noise * rng.standard_normal(scores.shape)
            labels = np.argmax(scores, axis=1).astype(np.int64)
            return Dataset(features=features, labels=labels, num_classes=spec.num_classes)

        w_star = rng.standard_normal(spec.p)
        features = rng.standard_normal((total, spec.p)) / np.sqrt(spec.p)
        targets = features @ w_star
        if spec.noise > 0:
            targets = targets + spec.noise * rng.standard_normal(total)
        return Dataset(features=features, labels=targets, num_classes=None)

    def generate(self, spec: SyntheticSpec) -> Dataset:
        return self.generate_bundle(spec).train

    def generate_bundle(self, spec: SyntheticSpec) -> DatasetBundle:
        full = self._draw(spec)
        train = Dataset(
            features=full.features[: spec.n],
            labels=full.labels[: spec.n],
            num_classes=full.num_classes,
        )
        if spec.num_test == 0:
            return DatasetBundle(train=train)
        test = Dataset(
            features=full.features[spec.n :],
            labels=full.labels[spec.n :],
            num_classes=full.num_classes,
        )
        return DatasetBundle(train=train, test=test)
