"""
평문 실행 설정 파서

형식:
    # 주석
    problem = least_squares
    architecture = shared     # 줄 끝 주석 허용
    output_dir = out#1        # 공백 뒤의 # 만 주석
    sgd_alpha_grid = 0.1, 0.05

명령행 덮어쓰기는 "key=value" 문자열 (--set) 로 받는다.
"""

import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from pydantic import ValidationError

from core.domain.errors import ConfigError
from core.domain.run_config import RunConfig

OVERRIDE_ORIGIN = "--set"

# 줄 처음 또는 공백 뒤의 # 부터 줄 끝까지
_COMMENT = re.compile(r"(?:^|\s)#.*$")


def _split_pair(text: str) -> Optional[Tuple[str, str]]:
    if "=" not in text:
        return None
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def parse_run_config_text(
    text: str, overrides: Iterable[str] = ()
) -> RunConfig:
    """
    설정 텍스트 + 덮어쓰기 → RunConfig

    Raises:
        ConfigError: 형식 오류, 중복 키, 필드 검증 실패 (줄 번호 / 필드 진단 포함)
    """
    values: Dict[str, str] = {}
    origins: Dict[str, str] = {}
    diagnostics: List[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _COMMENT.sub("", raw).strip()
        if not line:
            continue
        pair = _split_pair(line)
        if pair is None or not pair[0]:
            diagnostics.append(f"line {lineno}: 'key = value' 형식이 아님: {raw.strip()!r}")
            continue
        key, value = pair
        if key in values:
            diagnostics.append(f"line {lineno}: {key}: 중복 키 ({origins[key]} 에서 이미 지정)")
            continue
        values[key] = value
        origins[key] = f"line {lineno}"

    for item in overrides:
        pair = _split_pair(item)
        if pair is None or not pair[0]:
            diagnostics.append(f"{OVERRIDE_ORIGIN}: 'key=value' 형식이 아님: {item!r}")
            continue
        key, value = pair
        values[key] = value
        origins[key] = OVERRIDE_ORIGIN

    if diagnostics:
        raise ConfigError("설정 형식 오류", diagnostics)

    try:
        return RunConfig(**values)  # type: ignore[arg-type]
    except ValidationError as e:
        for err in e.errors():
            field = str(err["loc"][0]) if err["loc"] else ""
            where = origins.get(field, "config")
            label = f"{where}: {field}" if field else where
            diagnostics.append(f"{label}: {err['msg']}")
        raise ConfigError("설정 검증 실패", diagnostics) from e


def load_run_config(path: Path, overrides: Iterable[str] = ()) -> RunConfig:
    """설정 파일 읽기 (파일이 없으면 ConfigError)"""
    if not path.exists():
        raise ConfigError(f"설정 파일 없음: {path}")
    return parse_run_config_text(path.read_text(encoding="utf-8"), overrides)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def serialize_run_config(cfg: RunConfig) -> str:
    """
    RunConfig → 설정 텍스트 (필드 선언 순서)

    None 과 빈 격자는 생략한다. parse_run_config_text 로 다시 읽으면 같은 RunConfig.
    """
    lines = []
    for name in RunConfig.model_fields:
        value = getattr(cfg, name)
        if value is None or value == ():
            continue
        lines.append(f"{name} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
