"""
sweep 커맨드 - 워커 수별 실행과 speedup 표
"""

from pathlib import Path
from typing import List, Optional

import typer

from core.domain.errors import AsySvrgError
from interface.cli.config_loader import load_or_exit
from interface.cli.dependencies import build_dependencies


def parse_counts(text: str) -> List[int]:
    try:
        counts = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise typer.BadParameter(f"쉼표로 구분된 정수여야 함: {text!r}")
    if not counts:
        raise typer.BadParameter("워커 수가 비어 있음")
    return counts


def sweep_workers(
    config_path: Path = typer.Argument(..., help="key = value 실행 설정 파일"),
    workers: str = typer.Option("1,2,4", "--workers", "-w", help="워커 수 목록 (1 포함)"),
    overrides: Optional[List[str]] = typer.Option(
        None, "--set", help="설정 덮어쓰기 (key=value, 여러 번 지정 가능)"
    ),
):
    """
    워커 수 스윕

    목표 손실(1 워커 최종 손실 × 1.01)에 처음 닿은 시간으로 speedup 을 계산해
    speedup.csv 에 기록합니다. 실행 하나라도 발산하면 표는 남기고 종료 코드 1.
    """
    counts = parse_counts(workers)
    deps = build_dependencies()
    logger = deps["logger"]
    cfg = load_or_exit(config_path, overrides, logger)

    try:
        logger.info("=" * 60)
        logger.info(f"🚀 워커 스윕 - {cfg.architecture}, 워커 {counts}")
        logger.info("=" * 60)

        rows, path = deps["experiments"].sweep_workers(cfg, counts)

        logger.info("=" * 60)
        for row in rows:
            mark = "❌ 발산" if row.diverged else ("⏱️" if row.reached_target else "⚠️  목표 미도달")
            logger.info(
                f"  T={row.workers:<3} time={row.time_to_target} speedup={row.speedup} {mark}"
            )
        logger.info(f"🏁 speedup 표: {path}")
        logger.info("=" * 60)

    except KeyboardInterrupt:
        logger.warning("\n⚠️  사용자에 의해 중단되었습니다")
        raise typer.Exit(code=130)
    except AsySvrgError as e:
        logger.error(f"❌ 스윕 실패: {e}")
        raise typer.Exit(code=1)

    if any(row.diverged for row in rows):
        raise typer.Exit(code=1)
