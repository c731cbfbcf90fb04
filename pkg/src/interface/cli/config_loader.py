"""
명령 공용: 설정 파일 + --set 덮어쓰기 읽기
"""

from pathlib import Path
from typing import List, Optional

import typer

from core.domain.errors import ConfigError
from core.domain.run_config import RunConfig
from core.ports.utility_ports import LoggerPort
from infra.adapters.config.run_config_parser import load_run_config


def load_or_exit(
    config_path: Path, overrides: Optional[List[str]], logger: LoggerPort
) -> RunConfig:
    """설정 오류면 진단을 한 줄씩 남기고 사용법 오류(종료 코드 2)로 끝낸다"""
    try:
        return load_run_config(config_path, overrides or [])
    except ConfigError as e:
        logger.error(f"❌ 설정 오류: {config_path}")
        for line in e.diagnostics or [str(e)]:
            logger.error(f"   {line}")
        raise typer.Exit(code=2)
