"""
콘솔 로거 어댑터
"""

import io
import logging
import sys
from typing import Optional

from core.ports.utility_ports import LoggerPort

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
# live / threaded 실행은 워커 스레드에서도 로그를 남긴다
THREADED_LOG_FORMAT = "%(asctime)s [%(levelname)s] (%(threadName)s) %(message)s"


def resolve_level(level: Optional[str] = None) -> int:
    """
    명시 레벨 > Settings.LOG_LEVEL > INFO

    config 는 지연 임포트 (config → 어댑터 순환 방지)
    """
    if level is None:
        try:
            from config import config  # noqa: PLC0415

            level = config.LOG_LEVEL
        except Exception:
            return logging.INFO
    value = logging.getLevelName(level.upper())
    return value if isinstance(value, int) else logging.INFO


class ConsoleLogger(LoggerPort):
    """
    stdout 로거 (logging.getLogger(name) 에 핸들러 하나)

    같은 이름으로 여러 번 만들어도 핸들러는 한 번만 붙는다.
    staleness / IDX 어댑터가 logging.getLogger("asysvrg") 로 남기는 경고도 이 핸들러로 나간다.
    """

    def __init__(
        self, name: str = "asysvrg", level: Optional[str] = None, show_thread: bool = False
    ) -> None:
        self._logger = logging.getLogger(name)
        if not self._logger.handlers:
            self._attach_handler(resolve_level(level), show_thread)

    def _attach_handler(self, level: int, show_thread: bool) -> None:
        if isinstance(sys.stdout, io.TextIOWrapper):
            try:
                sys.stdout.reconfigure(encoding="utf-8")  # 이모지 / 한글
            except Exception:
                pass

        handler = logging.StreamHandler(sys.stdout)
        handler.setLevel(level)
        handler.setFormatter(
            logging.Formatter(
                fmt=THREADED_LOG_FORMAT if show_thread else LOG_FORMAT,
                datefmt="%H:%M:%S",
            )
        )
        self._logger.setLevel(level)
        self._logger.addHandler(handler)
        self._logger.propagate = False

    def info(self, message: str) -> None:
        self._logger.info(message)

    def warning(self, message: str) -> None:
        self._logger.warning(message)

    def error(self, message: str) -> None:
        self._logger.error(message)
