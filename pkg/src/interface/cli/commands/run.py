"""
run 커맨드 - 설정 하나 실행
"""

from pathlib import Path
from typing import List, Optional

import typer

from core.domain.errors import AsySvrgError
from interface.cli.config_loader import load_or_exit
from interface.cli.dependencies import build_dependencies


def run_experiment(
    config_path: Path = typer.Argument(..., help="key = value 실행 설정 파일"),
    overrides: Optional[List[str]] = typer.Option(
        None, "--set", help="설정 덮어쓰기 (key=value, 여러 번 지정 가능)"
    ),
):
    """
    실험 실행

    trace.csv 와 summary.json 을 출력 디렉터리(output_dir 또는 OUTPUT_DIR)에 기록합니다.
    발산하거나 이론 권장값이 실현 불가능하면 종료 코드 1.
    """
    deps = build_dependencies()
    logger = deps["logger"]
    cfg = load_or_exit(config_path, overrides, logger)

    try:
        logger.info("=" * 60)
        logger.info(f"🚀 AsySVRG 실험 - {cfg.method} / {cfg.architecture}")
        logger.info(f"🧮 문제: {cfg.problem} ({cfg.data_source}), S={cfg.S}, m={cfg.m}, b={cfg.b}")
        if cfg.architecture != "serial":
            logger.info(f"👷 워커 {cfg.num_workers}개, Δ={cfg.delta}")
        logger.info("=" * 60)

        artifacts = deps["experiments"].run_experiment(cfg)
        summary = artifacts.summary

        logger.info("=" * 60)
        logger.info(f"📉 최종 손실: {summary.final_loss}, ‖∇f‖²: {summary.final_grad_norm_sq}")
        if summary.theory is not None and summary.theory.note:
            logger.warning(f"⚠️  이론 판정: {summary.theory.note}")
        if summary.corollary1 is not None:
            verdict = "통과" if summary.corollary1.all_passed else "불통과"
            logger.info(f"🔎 Σ‖v‖² ≤ factor·Σ‖u‖² 검사: {verdict}")
        logger.info(f"🏁 산출물: {artifacts.output_dir}")
        logger.info("=" * 60)

    except KeyboardInterrupt:
        logger.warning("\n⚠️  사용자에 의해 중단되었습니다")
        raise typer.Exit(code=130)
    except AsySvrgError as e:
        logger.error(f"❌ 실행 실패: {e}")
        raise typer.Exit(code=1)

    if not artifacts.exit_ok:
        raise typer.Exit(code=1)
