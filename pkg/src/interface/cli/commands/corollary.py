"""
check-corollary 커맨드 - 저장된 Trace 의 Σ‖v‖² 대 Σ‖u‖² 검사
"""

from pathlib import Path
from typing import List, Optional

import typer

from core.domain.errors import AsySvrgError
from interface.cli.config_loader import load_or_exit
from interface.cli.dependencies import build_dependencies


def check_corollary(
    trace_path: Path = typer.Argument(..., help="trace.csv 경로"),
    config_path: Path = typer.Argument(..., help="Trace 를 만든 실행 설정 파일"),
    overrides: Optional[List[str]] = typer.Option(
        None, "--set", help="설정 덮어쓰기 (key=value, 여러 번 지정 가능)"
    ),
):
    """
    epoch 별 Σ‖v‖² ≤ factor·Σ‖u‖² 검사 (replay / 시뮬레이션 / 직렬 실행의 Trace)

    불통과 epoch 이 있으면 종료 코드 1.
    """
    deps = build_dependencies()
    logger = deps["logger"]
    cfg = load_or_exit(config_path, overrides, logger)

    try:
        report = deps["experiments"].check_corollary_file(trace_path, cfg)
    except FileNotFoundError as e:
        logger.error(f"❌ {e}")
        raise typer.Exit(code=1)
    except AsySvrgError as e:
        logger.error(f"❌ 검사 불가: {e}")
        raise typer.Exit(code=1)

    logger.info("=" * 60)
    if not report.applicable:
        logger.warning(f"⚠️  {report.message}")
        logger.info("=" * 60)
        return

    logger.info(f"🔎 mode={report.mode}, Δ={report.delta}, factor={report.factor:.6g}")
    for row in report.epochs:
        status = "OK" if row.passed else "FAIL"
        logger.info(
            f"  [{status}] epoch {row.epoch}: Σ‖v‖²={row.sum_v_sq:.6g}, "
            f"Σ‖u‖²={row.sum_u_sq:.6g}, 비율={row.ratio}"
        )
    logger.info("=" * 60)
    if not report.all_passed:
        raise typer.Exit(code=1)
