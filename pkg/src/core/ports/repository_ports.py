"""
실험 산출물 저장소 포트 인터페이스
"""

from abc import ABC, abstractmethod
from pathlib import Path
import pandas as pd

from core.domain.experiment_models import ExperimentSummary
from core.domain.models import Trace


class ArtifactRepositoryPort(ABC):
    """
    산출물 저장소 포트

    책임:
        - Trace CSV (열: epoch, iter, loss, grad_norm_sq, wall_ns, sum_v_sq, sum_u_sq)
        - summary JSON, 스케줄 텍스트, 이벤트 로그, speedup 표

    Contract:
        같은 내용은 항상 같은 바이트로 기록한다 (결정적 실행의 CSV 비교용).
        반환 경로는 실제로 존재하는 파일이다.

    구현체 예: FileArtifactRepository
    """

    @abstractmethod
    def save_trace(self, directory: Path, trace: Trace, name: str = "trace.csv") -> Path:
        pass

    @abstractmethod
    def load_trace(self, path: Path) -> Trace:
        pass

    @abstractmethod
    def save_summary(self, directory: Path, summary: ExperimentSummary) -> Path:
        pass

    @abstractmethod
    def save_text(self, directory: Path, name: str, text: str) -> Path:
        """스케줄, 이벤트 로그 등 줄 단위 텍스트"""
        pass

    @abstractmethod
    def save_table(self, directory: Path, name: str, table: pd.DataFrame) -> Path:
        pass
