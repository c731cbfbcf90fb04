"""
하드웨어 speedup 벤치마크: 실제 스레드(shared live / distributed threaded) + wall 시계

결과는 하드웨어에 따라 달라지므로 테스트에서 수치를 검증하지 않는다.

실행: uv run python scripts/benchmark_speedup.py --architecture shared --workers 1,2,4,8
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import typer  # noqa: E402

from config import config  # noqa: E402
from core.domain.errors import AsySvrgError  # noqa: E402
from core.domain.run_config import RunConfig  # noqa: E402
from interface.cli.commands.sweep import parse_counts  # noqa: E402
from interface.cli.dependencies import build_dependencies  # noqa: E402

app = typer.Typer(add_completion=False)


def benchmark_config(
    architecture: str, problem: str, n: int, p: int, S: int, m: int, b: int, eta: float
) -> RunConfig:
    """wall 시계 + 실제 스레드 실행 설정 (Δ=m: 동시성 지연을 거부하지 않음)"""
    return RunConfig(
        problem=problem,
        n=n,
        p=p,
        S=S,
        m=m,
        b=b,
        eta=eta,
        architecture=architecture,
        shared_mode="live",
        dist_mode="threaded",
        delta=m,
        clock="wall",
        lipschitz=1.0,
        output_dir=str(config.OUTPUT_DIR / "benchmark"),
    )


@app.command()
def main(
    architecture: str = typer.Option("shared", help="shared 또는 distributed"),
    workers: str = typer.Option("1,2,4", help="워커 수 목록 (1 포함)"),
    problem: str = typer.Option("logistic_nonconvex", help="문제 종류"),
    n: int = typer.Option(20000, "--n"),
    p: int = typer.Option(200, "--p"),
    S: int = typer.Option(5, "--S"),
    m: int = typer.Option(2000, "--m"),
    b: int = typer.Option(10, "--b"),
    eta: float = typer.Option(0.05, "--eta"),
):
    """워커 수별 wall 시간과 speedup 표"""
    if architecture not in ("shared", "distributed"):
        raise typer.BadParameter(f"shared / distributed 중 하나여야 함: {architecture}")
    counts = parse_counts(workers)
    deps = build_dependencies()
    logger = deps["logger"]

    try:
        cfg = benchmark_config(architecture, problem, n, p, S, m, b, eta)
        rows, path = deps["experiments"].sweep_workers(cfg, counts)
    except AsySvrgError as e:
        logger.error(f"❌ 벤치마크 실패: {e}")
        raise typer.Exit(code=1)

    logger.info(f"{'workers':>8} {'time(ms)':>12} {'speedup':>8}")
    for row in rows:
        time_ms = "-" if row.time_to_target is None else f"{row.time_to_target / 1e6:.1f}"
        ratio = "-" if row.speedup is None else f"{row.speedup:.2f}"
        logger.info(f"{row.workers:>8} {time_ms:>12} {ratio:>8}")
    logger.info(f"표: {path}")


if __name__ == "__main__":
    app()
