"""
데이터 적재 관련 포트 인터페이스
"""

from abc import ABC, abstractmethod

from core.domain.models import Dataset, DatasetBundle, SyntheticSpec
from core.domain.run_config import RunConfig


class IdxReaderPort(ABC):
    """
    IDX(MNIST) 파일 읽기 포트

    책임: 이미지/레이블 IDX 파일 쌍을 Dataset 으로 변환
    """

    @abstractmethod
    def load_idx(self, images_path: str, labels_path: str, limit: int) -> Dataset:
        """
        Contract:
            픽셀은 [0, 1] 로 정규화, 최대 limit 개 표본.
            매직 넘버 불일치, 잘린 파일, 개수 불일치는 DatasetFormatError.
        """
        pass


class SyntheticGeneratorPort(ABC):
    """
    합성 데이터 생성 포트

    책임: 같은 명세에 대해 비트 단위로 같은 데이터 생성
    """

    @abstractmethod
    def generate(self, spec: SyntheticSpec) -> Dataset:
        """학습용 n 개 표본"""
        pass

    @abstractmethod
    def generate_bundle(self, spec: SyntheticSpec) -> DatasetBundle:
        """학습 n 개 + 테스트 num_test 개 (테스트가 0 이면 test=None)"""
        pass


class DatasetProviderPort(ABC):
    """
    실행 설정으로부터 데이터 묶음을 준비하는 포트

    구현체 예: DatasetProvider (IDX 우선, 파일이 없으면 합성 데이터로 대체)
    """

    @abstractmethod
    def load(self, cfg: RunConfig) -> DatasetBundle:
        pass
