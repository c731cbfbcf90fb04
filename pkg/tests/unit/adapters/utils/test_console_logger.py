"""
ConsoleLogger 단위 테스트
"""
import logging
import uuid

import pytest

from infra.adapters.utils.console_logger import THREADED_LOG_FORMAT, ConsoleLogger, resolve_level


@pytest.fixture
def logger():
    """테스트마다 고유 이름 (핸들러 격리), caplog 가 잡도록 propagate 허용"""
    c_logger = ConsoleLogger(name=f"test_{uuid.uuid4().hex[:8]}")
    c_logger._logger.propagate = True
    return c_logger


class TestConsoleLogger:
    def test_default_name_shared_with_module_loggers(self):
        assert ConsoleLogger()._logger is logging.getLogger("asysvrg")

    def test_handler_added_once(self):
        name = f"test_{uuid.uuid4().hex[:8]}"
        ConsoleLogger(name=name)
        ConsoleLogger(name=name)
        assert len(logging.getLogger(name).handlers) == 1

    @pytest.mark.parametrize(
        "method, level",
        [("info", logging.INFO), ("warning", logging.WARNING), ("error", logging.ERROR)],
    )
    def test_levels(self, logger, caplog, method, level):
        with caplog.at_level(logging.DEBUG, logger=logger._logger.name):
            getattr(logger, method)(f"epoch 3 손실 {method}")
        assert caplog.records[-1].levelno == level
        assert f"epoch 3 손실 {method}" in caplog.text

    def test_emoji_and_multiline(self, logger, caplog):
        message = "⚠️ 발산\nloss=inf"
        with caplog.at_level(logging.INFO, logger=logger._logger.name):
            logger.warning(message)
        assert "⚠️ 발산" in caplog.text

    def test_thread_name_format(self):
        name = f"test_{uuid.uuid4().hex[:8]}"
        ConsoleLogger(name=name, show_thread=True)
        assert logging.getLogger(name).handlers[0].formatter._fmt == THREADED_LOG_FORMAT


class TestResolveLevel:
    @pytest.mark.parametrize(
        "level, expected",
        [("debug", logging.DEBUG), ("WARNING", logging.WARNING), ("verbose", logging.INFO)],
    )
    def test_explicit(self, level, expected):
        assert resolve_level(level) == expected

    def test_explicit_level_applies_to_logger(self):
        c_logger = ConsoleLogger(name=f"test_{uuid.uuid4().hex[:8]}", level="error")
        assert c_logger._logger.level == logging.ERROR
