"""
AsySVRG CLI - 단일 진입점
"""

import typer
from interface.cli.commands.run import run_experiment
from interface.cli.commands.sweep import sweep_workers
from interface.cli.commands.theory import theory
from interface.cli.commands.corollary import check_corollary
from interface.cli.commands.health import health_check

app = typer.Typer(help="비동기 분산감소 SGD(AsySVRG) 실험 CLI")

app.command("run")(run_experiment)
app.command("sweep")(sweep_workers)
app.command("theory")(theory)
app.command("check-corollary")(check_corollary)
app.command("healthcheck")(health_check)

if __name__ == "__main__":
    app()
