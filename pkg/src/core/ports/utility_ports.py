"""
유틸리티 관련 포트 인터페이스
"""

from abc import ABC, abstractmethod


class LoggerPort(ABC):
    """
    로깅 포트

    책임: 로그 출력
    """

    @abstractmethod
    def info(self, message: str) -> None:
        """정보 로그"""
        pass

    @abstractmethod
    def warning(self, message: str) -> None:
        """경고 로그"""
        pass

    @abstractmethod
    def error(self, message: str) -> None:
        """에러 로그"""
        pass


class ClockPort(ABC):
    """
    시계 포트

    책임: 실행기의 경과 시간 측정 (Trace.wall_ns)

    Contract:
        elapsed_ns() 는 start() 이후 단조 증가해야 합니다.
        advance(units) 는 그래디언트 계산량(표본 단위)을 알리는 호출이며,
        실제 시계는 이를 무시하고 논리 시계는 이것만으로 시간을 센다.
    """

    kind: str = ""

    @abstractmethod
    def start(self) -> None:
        """측정 시작 (0으로 초기화)"""
        pass

    @abstractmethod
    def advance(self, units: int) -> None:
        """표본 그래디언트 units 개 분량의 작업이 끝났음을 알림"""
        pass

    @abstractmethod
    def elapsed_ns(self) -> int:
        """start() 이후 경과 시간"""
        pass
