"""
scripts/benchmark_speedup.py typer 앱 테스트 (실행기는 mock)
"""

import importlib.util
from pathlib import Path
from unittest.mock import MagicMock

import pytest
from typer.testing import CliRunner

from core.domain.experiment_models import SweepRow

SCRIPT = Path(__file__).resolve().parents[2] / "scripts" / "benchmark_speedup.py"


@pytest.fixture
def script():
    spec = importlib.util.spec_from_file_location("benchmark_speedup", SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.fixture
def deps(script, monkeypatch):
    experiments = MagicMock()
    experiments.sweep_workers.return_value = (
        [
            SweepRow(workers=1, time_to_target=4e6, reached_target=True, final_loss=0.5, diverged=False, speedup=1.0),
            SweepRow(workers=2, time_to_target=None, reached_target=False, final_loss=0.6, diverged=False, speedup=None),
        ],
        Path("out/speedup.csv"),
    )
    container = {"experiments": experiments, "logger": MagicMock()}
    monkeypatch.setattr(script, "build_dependencies", lambda: container)
    return container


def test_options_reach_run_config(script, deps):
    result = CliRunner().invoke(
        script.app, ["--architecture", "distributed", "--workers", "1,2", "--n", "300", "--m", "50"]
    )
    assert result.exit_code == 0, result.output

    cfg, counts = deps["experiments"].sweep_workers.call_args.args
    assert counts == [1, 2]
    assert (cfg.architecture, cfg.n, cfg.m, cfg.delta) == ("distributed", 300, 50, 50)
    assert (cfg.dist_mode, cfg.shared_mode, cfg.clock) == ("threaded", "live", "wall")


def test_table_goes_through_logger(script, deps):
    CliRunner().invoke(script.app, [])
    lines = [c.args[0] for c in deps["logger"].info.call_args_list]
    assert lines[1].split() == ["1", "4.0", "1.00"]
    assert lines[2].split() == ["2", "-", "-"]
    assert "speedup.csv" in lines[-1]


def test_unknown_architecture_rejected(script, deps):
    result = CliRunner().invoke(script.app, ["--architecture", "serial"])
    assert result.exit_code != 0
    deps["experiments"].sweep_workers.assert_not_called()
