"""
theory 커맨드 - 설정에 대한 수렴 이론 계산
"""

import json
from pathlib import Path
from typing import List, Optional

import typer

from core.domain.errors import AsySvrgError, InfeasibleParametersError
from interface.cli.config_loader import load_or_exit
from interface.cli.dependencies import build_dependencies


def theory(
    config_path: Path = typer.Argument(..., help="key = value 실행 설정 파일"),
    overrides: Optional[List[str]] = typer.Option(
        None, "--set", help="설정 덮어쓰기 (key=value, 여러 번 지정 가능)"
    ),
):
    """
    c_t, Γ_t, γ, Δ 상한, 큰 n 조건 계산 (최적화는 실행하지 않음)

    결과는 theory.json 으로 저장됩니다. γ ≤ 0 이거나 분모가 양수가 아니면 종료 코드 1.
    """
    deps = build_dependencies()
    logger = deps["logger"]
    cfg = load_or_exit(config_path, overrides, logger)

    try:
        result = deps["experiments"].analyze_theory(cfg)
    except InfeasibleParametersError as e:
        logger.error(f"❌ 실현 불가능한 파라미터: {e}")
        raise typer.Exit(code=1)
    except AsySvrgError as e:
        logger.error(f"❌ 이론 계산 실패: {e}")
        raise typer.Exit(code=1)

    report = result["report"]
    out = deps["experiments"].output_dir(cfg)
    path = deps["repository"].save_text(
        out, "theory.json", json.dumps(result, ensure_ascii=False, indent=2) + "\n"
    )

    logger.info("=" * 60)
    logger.info(f"📐 mode={report['mode']}  γ={report['gamma']:.6g}  θ={report['theta']:.6g}")
    logger.info(f"   c_0={report['c'][0]:.6g} (닫힌 형식 {report['c0_closed']:.6g})")
    logger.info(f"   Δ² 상한={result['delay_bound']:.6g}, 최대 Δ={result['max_delay']}")
    logger.info(f"   큰 n 조건: {'만족' if result['side_condition_ok'] else '불만족'}")
    logger.info(f"💾 {path}")
    logger.info("=" * 60)

    if not report["feasible"]:
        logger.error("❌ γ ≤ 0 - 수렴 보장 없음")
        raise typer.Exit(code=1)
