"""
healthcheck 커맨드 - 실행 환경 점검
"""

import tempfile
from pathlib import Path

import typer

from config import config
from infra.adapters.utils.console_logger import ConsoleLogger

logger = ConsoleLogger(name="healthcheck")


def _check(label: str, ok: bool, hint: str = "") -> bool:
    status = "OK" if ok else "FAIL"
    logger.info(f"  [{status}] {label}")
    if not ok and hint:
        logger.warning(f"       => {hint}")
    return ok


def _writable(directory: Path) -> bool:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=directory):
            pass
        return True
    except OSError:
        return False


def _resolve(name: str) -> Path:
    path = Path(name)
    return path if path.is_absolute() else config.BASE_DIR / path


def health_check():
    """
    시스템 헬스 체크

    출력 디렉터리 쓰기 권한과 MNIST(IDX) 파일 존재 여부를 점검합니다.
    MNIST 파일이 없어도 합성 데이터로 대체되므로 실패로 보지 않습니다.
    """
    logger.info("=" * 50)
    logger.info("  시스템 헬스 체크")
    logger.info("=" * 50)

    all_ok = True

    # 1. 출력 디렉터리
    logger.info("")
    logger.info("[1] 출력 디렉터리 점검")
    if not _check(
        f"OUTPUT_DIR     ({config.OUTPUT_DIR})",
        _writable(config.OUTPUT_DIR),
        "쓰기 가능한 경로를 .env 의 OUTPUT_DIR 로 지정해 주세요.",
    ):
        all_ok = False

    # 2. MNIST 파일
    logger.info("")
    logger.info("[2] MNIST(IDX) 파일 점검")
    missing = 0
    for name in (
        config.MNIST_TRAIN_IMAGES,
        config.MNIST_TRAIN_LABELS,
        config.MNIST_TEST_IMAGES,
        config.MNIST_TEST_LABELS,
    ):
        path = _resolve(name)
        if not _check(f"{path.name:<28}({path})", path.exists()):
            missing += 1
    if missing:
        logger.warning(
            f"  [SKIP] {missing}개 파일 없음 - data_source=idx 실행은 합성 데이터로 대체됩니다."
        )

    # 결과 요약
    logger.info("")
    logger.info("=" * 50)
    if all_ok:
        logger.info("  결과: 모든 항목 정상")
    else:
        logger.error("  결과: 일부 항목 확인 필요 (위 FAIL 항목을 확인하세요)")
        logger.info("=" * 50)
        raise typer.Exit(code=1)
    logger.info("=" * 50)
