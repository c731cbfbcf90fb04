"""
CLI 의존성 주입 모듈
"""

from typing import Any, Dict

from config import config
from core.services.experiment_service import ExperimentService
from infra.adapters.data.dataset_provider import DatasetProvider
from infra.adapters.data.idx_dataset_adapter import IdxDatasetAdapter
from infra.adapters.data.synthetic_dataset_adapter import SyntheticDatasetAdapter
from infra.adapters.storage.artifact_repository import FileArtifactRepository
from infra.adapters.utils.clocks import LogicalClock, WallClock
from infra.adapters.utils.console_logger import ConsoleLogger


def build_dependencies() -> Dict[str, Any]:
    """
    의존성 주입 컨테이너

    Returns:
        Dict: 구성된 서비스 및 어댑터 모음
    """
    # 1. 공통 유틸리티
    logger = ConsoleLogger(show_thread=True)
    clocks = {"logical": LogicalClock(), "wall": WallClock()}

    # 2. 데이터 어댑터 (IDX 우선, 없으면 합성 데이터)
    dataset_provider = DatasetProvider(
        idx_reader=IdxDatasetAdapter(),
        synthetic=SyntheticDatasetAdapter(),
        logger=logger,
    )

    # 3. 산출물 저장소
    repository = FileArtifactRepository()

    # 4. 실험 하네스
    experiments = ExperimentService(
        dataset_provider=dataset_provider,
        repository=repository,
        logger=logger,
        clocks=clocks,
        output_root=config.OUTPUT_DIR,
        divergence_threshold=config.DIVERGENCE_THRESHOLD,
    )

    return {
        "experiments": experiments,
        "repository": repository,
        "logger": logger,
    }
