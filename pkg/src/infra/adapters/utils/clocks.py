"""
시계 어댑터

WallClock    : 실제 경과 시간 (하드웨어 speedup 측정용)
LogicalClock : 표본 그래디언트 계산 개수 (CSV Trace 를 비트 단위로 재현 가능하게)
"""

import threading
import time

from core.ports.utility_ports import ClockPort


class WallClock(ClockPort):
    """time.perf_counter_ns 기반 단조 시계"""

    kind = "wall"

    def __init__(self) -> None:
        self._origin = time.perf_counter_ns()

    def start(self) -> None:
        self._origin = time.perf_counter_ns()

    def advance(self, units: int) -> None:
        pass

    def elapsed_ns(self) -> int:
        return time.perf_counter_ns() - self._origin


class LogicalClock(ClockPort):
    """advance(units) 누적값을 시간으로 보고 (여러 워커 스레드에서 호출 가능)"""

    kind = "logical"

    def __init__(self) -> None:
        self._units = 0
        self._lock = threading.Lock()

    def start(self) -> None:
        with self._lock:
            self._units = 0

    def advance(self, units: int) -> None:
        with self._lock:
            self._units += units

    def elapsed_ns(self) -> int:
        return self._units
