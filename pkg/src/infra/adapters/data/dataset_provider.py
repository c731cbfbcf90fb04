"""
실행 설정 → 데이터 묶음 어댑터
"""

from pathlib import Path
from typing import Optional

from config import config
from core.domain.models import DatasetBundle, SyntheticSpec
from core.domain.run_config import RunConfig
from core.ports.data_ports import DatasetProviderPort, IdxReaderPort, SyntheticGeneratorPort
from core.ports.utility_ports import LoggerPort


class DatasetProvider(DatasetProviderPort):
    """
    data_source 에 따라 데이터 준비

    synthetic : (n, p, num_classes, noise, seed, num_test) 합성 데이터,
                least_squares 는 회귀 타깃
    idx       : MNIST 학습 파일에서 data_limit 개, 테스트 파일에서 num_test 개.
                파일이 없으면 경고 후 data_limit 개 합성 분류 데이터로 대체
    """

    def __init__(
        self,
        idx_reader: IdxReaderPort,
        synthetic: SyntheticGeneratorPort,
        logger: LoggerPort,
        base_dir: Optional[Path] = None,
    ) -> None:
        self.idx_reader = idx_reader
        self.synthetic = synthetic
        self.logger = logger
        self._base_dir = base_dir or config.BASE_DIR

    def _resolve(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self._base_dir / path

    def _synthetic_spec(self, cfg: RunConfig, n: int) -> SyntheticSpec:
        return SyntheticSpec(
            n=n,
            p=cfg.p,
            num_classes=cfg.num_classes,
            noise=cfg.noise,
            seed=cfg.seed,
            task="regression" if cfg.problem == "least_squares" else "classification",
            num_test=cfg.num_test,
        )

    def load(self, cfg: RunConfig) -> DatasetBundle:
        if cfg.data_source == "synthetic":
            return self.synthetic.generate_bundle(self._synthetic_spec(cfg, cfg.n))

        train_images = self._resolve(config.MNIST_TRAIN_IMAGES)
        train_labels = self._resolve(config.MNIST_TRAIN_LABELS)
        if not (train_images.exists() and train_labels.exists()):
            self.logger.warning(
                f"⚠️ MNIST 파일 없음 ({train_images}) - 합성 데이터 {cfg.data_limit}개로 대체"
            )
            return self.synthetic.generate_bundle(self._synthetic_spec(cfg, cfg.data_limit))

        train = self.idx_reader.load_idx(str(train_images), str(train_labels), cfg.data_limit)
        if cfg.num_test == 0:
            return DatasetBundle(train=train)

        test_images = self._resolve(config.MNIST_TEST_IMAGES)
        test_labels = self._resolve(config.MNIST_TEST_LABELS)
        if not (test_images.exists() and test_labels.exists()):
            self.logger.warning(f"⚠️ MNIST 테스트 파일 없음 ({test_images}) - 테스트 오류율 생략")
            return DatasetBundle(train=train)
        test = self.idx_reader.load_idx(str(test_images), str(test_labels), cfg.num_test)
        return DatasetBundle(train=train, test=test)
