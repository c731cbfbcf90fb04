"""
ExperimentService 단위 테스트

DatasetProviderPort / ArtifactRepositoryPort 는 mock 으로 주입하고
실행기 선택, 설정 해석, 판정 로직만 검증한다.
"""

from pathlib import Path
from unittest.mock import Mock

import numpy as np
import pytest

from core.domain.errors import ConfigError, InvalidInputError
from core.domain.models import DatasetBundle, Trace, TraceRecord
from core.domain.run_config import RunConfig
from core.ports.data_ports import DatasetProviderPort
from core.ports.repository_ports import ArtifactRepositoryPort
from core.services.experiment_service import (
    ExperimentService,
    sgd_iterations_per_epoch,
    time_to_target,
)
from core.services.problem_diagnostics import estimate_L
from infra.adapters.utils.clocks import LogicalClock, WallClock


@pytest.fixture
def mock_repository() -> ArtifactRepositoryPort:
    repo = Mock(spec=ArtifactRepositoryPort)
    repo.save_trace.side_effect = lambda directory, trace, name="trace.csv": directory / name
    repo.save_summary.side_effect = lambda directory, summary: directory / "summary.json"
    repo.save_text.side_effect = lambda directory, name, text: directory / name
    repo.save_table.side_effect = lambda directory, name, table: directory / name
    return repo


@pytest.fixture
def make_service(mock_repository, mock_logger, tmp_path):
    def build(dataset) -> ExperimentService:
        provider = Mock(spec=DatasetProviderPort)
        provider.load.return_value = DatasetBundle(train=dataset)
        return ExperimentService(
            dataset_provider=provider,
            repository=mock_repository,
            logger=mock_logger,
            clocks={"logical": LogicalClock(), "wall": WallClock()},
            output_root=tmp_path / "out",
        )

    return build


@pytest.fixture
def service(make_service, least_squares_factory):
    return make_service(least_squares_factory(n=120, d=8).dataset)


def _cfg(**kwargs) -> RunConfig:
    base = dict(S=3, m=30, b=4, eta=0.1, lipschitz=2.0)
    base.update(kwargs)
    return RunConfig(**base)


class TestHelpers:
    def test_sgd_iterations_match_svrg_data_passes(self):
        assert sgd_iterations_per_epoch(1000, 10, 100) == 300
        assert sgd_iterations_per_epoch(7, 2, 1) == 6

    def test_time_to_target(self):
        trace = Trace()
        for loss, wall in [(3.0, 0), (2.0, 5), (1.0, 9)]:
            trace.append(TraceRecord(0, 0, loss, 0.0, wall))
        assert time_to_target(trace, 2.0) == 5
        assert time_to_target(trace, 0.5) is None
        # 시간 0 은 speedup 계산을 위해 1 로 올림
        assert time_to_target(trace, 5.0) == 1


class TestResolveSettings:
    def test_explicit_values(self, service):
        _, problem = service.prepare(_cfg())
        settings = service.resolve_settings(_cfg(), problem)
        assert (settings.L, settings.eta, settings.beta, settings.m) == (2.0, 0.1, 4.0, 30)

    def test_explicit_beta(self, service):
        _, problem = service.prepare(_cfg(beta=0.5))
        assert service.resolve_settings(_cfg(beta=0.5), problem).beta == 0.5

    def test_estimated_lipschitz(self, service):
        cfg = _cfg(lipschitz=None)
        _, problem = service.prepare(cfg)
        assert service.resolve_settings(cfg, problem).L == estimate_L(problem, seed=cfg.seed)

    def test_theory_settings(self, service):
        cfg = _cfg(use_theory_settings=True, u0=0.1, b=2, alpha_exp=1.0)
        _, problem = service.prepare(cfg)
        settings = service.resolve_settings(cfg, problem)
        assert settings.eta == pytest.approx(0.1 * 2 / (2.0 * 120))
        assert settings.beta == 4.0
        assert settings.m == int(120 / (6 * 0.1 * 2))

    def test_serial_theory_ignores_delta(self, service):
        cfg = _cfg(delta=3)
        _, problem = service.prepare(cfg)
        p = service.theory_params(cfg, problem, service.resolve_settings(cfg, problem))
        assert p.Delta == 0
        assert p.mode == "distributed"


class TestExecute:
    def test_serial_svrg(self, service):
        outcome = service.execute(_cfg())
        assert not outcome.trace.diverged
        assert outcome.warmup is None
        assert outcome.trace.final_loss < outcome.trace.records[0].loss

    def test_sgd_grid_picks_best_non_diverged(self, service):
        cfg = _cfg(method="sgd", sgd_alpha_grid="0.05, 200", sgd_beta_grid="0")
        outcome = service.execute(cfg)
        assert [(r.alpha, r.diverged) for r in outcome.sgd_grid] == [(0.05, False), (200.0, True)]
        assert not outcome.trace.diverged
        assert outcome.trace.final_loss == outcome.sgd_grid[0].final_loss

    def test_warm_start_hands_over_final_sgd_point(self, service):
        cfg = _cfg(method="sgd_then_svrg", sgd_epochs=2, sgd_alpha=0.1)
        outcome = service.execute(cfg)
        assert outcome.warmup is not None
        assert outcome.trace.records[0].loss == outcome.warmup.final_loss

    def test_zero_warm_start_epochs_is_plain_svrg(self, service):
        plain = service.execute(_cfg())
        warm = service.execute(_cfg(method="sgd_then_svrg", sgd_epochs=0))
        assert warm.warmup is None
        assert warm.trace.trajectory_equals(plain.trace)

    def test_shared_replay_keeps_schedule(self, service):
        cfg = _cfg(architecture="shared", num_workers=2, delta=2, schedule_model="adversarial_max")
        outcome = service.execute(cfg)
        assert outcome.schedule is not None
        assert outcome.schedule.delta == 2
        assert outcome.trace.extras["max_staleness"] == 2.0

    def test_live_mode_warns_about_unused_schedule(self, service, mock_logger):
        cfg = _cfg(architecture="shared", num_workers=2, shared_mode="live", schedule_model="uniform", S=1)
        outcome = service.execute(cfg)
        assert outcome.schedule is None
        assert any("schedule_model" in str(call) for call in mock_logger.warning.call_args_list)

    def test_distributed_event_log(self, service):
        outcome = service.execute(_cfg(architecture="distributed", num_workers=2, event_log=True, S=1))
        assert outcome.events
        assert outcome.events[0].kind == "broadcast"

    def test_prepared_data_reused(self, service):
        prepared = service.prepare(_cfg())
        service.execute(_cfg(), prepared)
        service.dataset_provider.load.assert_called_once()


class TestRunExperiment:
    def test_artifacts_and_summary(self, service, mock_repository, tmp_path):
        result = service.run_experiment(
            _cfg(architecture="shared", num_workers=2, delta=1, schedule_model="uniform")
        )
        assert result.exit_ok
        assert result.output_dir == tmp_path / "out"
        assert set(result.paths) == {"trace", "schedule", "summary"}
        summary = result.summary
        assert summary.artifacts == {"trace": "trace.csv", "schedule": "schedule.txt"}
        assert summary.clock == "logical"
        assert summary.theory is not None and summary.theory.mode == "shared"
        assert summary.corollary1 is not None and summary.corollary1.applicable
        mock_repository.save_summary.assert_called_once()

    def test_output_dir_override(self, service, tmp_path):
        result = service.run_experiment(_cfg(output_dir=str(tmp_path / "custom"), S=1))
        assert result.output_dir == tmp_path / "custom"

    def test_serial_corollary_is_exact(self, service):
        summary = service.run_experiment(_cfg(S=2)).summary
        assert summary.corollary1.all_passed
        assert all(row.ratio == 1.0 for row in summary.corollary1.epochs)

    def test_live_run_has_no_corollary(self, service):
        summary = service.run_experiment(
            _cfg(architecture="shared", num_workers=2, shared_mode="live", S=1)
        ).summary
        assert summary.corollary1 is None

    def test_sgd_summary_has_no_theory(self, service):
        summary = service.run_experiment(_cfg(method="sgd", S=2)).summary
        assert summary.theory is None
        assert len(summary.sgd_grid) == 1

    def test_simulated_clock_label(self, service):
        summary = service.run_experiment(_cfg(architecture="distributed", num_workers=2, S=1)).summary
        assert summary.clock == "simulated"
        assert summary.elapsed == summary.extras["simulated_time"]

    def test_divergence_fails_run(self, service, mock_logger):
        result = service.run_experiment(_cfg(eta=500.0, S=5))
        assert result.summary.diverged
        assert not result.exit_ok
        mock_logger.error.assert_called()

    def test_infeasible_theory_is_a_note_for_manual_settings(self, service):
        cfg = _cfg(architecture="distributed", num_workers=1, delta=50, S=1)
        result = service.run_experiment(cfg)
        theory = result.summary.theory
        assert not theory.feasible
        assert theory.note
        assert theory.error == ""
        assert result.exit_ok

    def test_infeasible_theory_fails_theory_driven_run(self, make_service, least_squares_factory):
        # n^α = 4, u₀b = 0.5 → ηL = 1/8, m = 1; Δ=6 이면 1 − 2Δ²/64 < 0
        service = make_service(least_squares_factory(n=16, d=4).dataset)
        cfg = RunConfig(
            architecture="distributed",
            delta=6,
            use_theory_settings=True,
            u0=0.05,
            b=10,
            alpha_exp=0.5,
            S=2,
            lipschitz=2.0,
        )
        result = service.run_experiment(cfg)
        assert not result.summary.diverged
        assert result.summary.theory.error
        assert not result.exit_ok

    def test_classification_errors_reported(self, make_service, classification_factory):
        service = make_service(classification_factory(n=50, p=5))
        summary = service.run_experiment(_cfg(problem="logistic_nonconvex", S=2)).summary
        assert 0.0 <= summary.train_error <= 1.0
        assert summary.test_error is None


class TestSweep:
    def test_requires_serial_reference(self, service):
        with pytest.raises(InvalidInputError):
            service.sweep_workers(_cfg(architecture="distributed", num_workers=2), [2, 4])

    def test_rejects_non_positive_counts(self, service):
        with pytest.raises(InvalidInputError):
            service.sweep_workers(_cfg(architecture="distributed", num_workers=2), [0, 1])

    def test_serial_architecture_cannot_scale(self, service):
        with pytest.raises(ConfigError):
            service.sweep_workers(_cfg(), [1, 2])

    def test_single_count_has_unit_speedup(self, service, mock_repository):
        rows, path = service.sweep_workers(_cfg(architecture="distributed", S=2), [1])
        assert [(r.workers, r.speedup, r.reached_target) for r in rows] == [(1, 1.0, True)]
        assert path.name == "speedup.csv"
        table = mock_repository.save_table.call_args.args[2]
        assert list(table["workers"]) == [1]

    def test_simulated_sweep(self, service, mock_repository):
        cfg = _cfg(architecture="distributed", num_workers=1, S=3, eta=0.05)
        rows, _ = service.sweep_workers(cfg, [4, 1, 2, 2])
        assert [r.workers for r in rows] == [1, 2, 4]
        saved = [call.args[2] for call in mock_repository.save_trace.call_args_list]
        assert saved == ["trace_w1.csv", "trace_w2.csv", "trace_w4.csv"]
        for row in rows:
            if row.reached_target:
                assert row.speedup == pytest.approx(rows[0].time_to_target / row.time_to_target)
            else:
                assert row.speedup is None
        service.dataset_provider.load.assert_called_once()


class TestTheoryAndCorollary:
    def test_analyze_theory(self, service):
        result = service.analyze_theory(_cfg(architecture="shared", num_workers=4, delta=2))
        assert result["params"]["mode"] == "shared"
        assert result["params"]["Delta"] == 2
        assert result["report"]["feasible"] in (True, False)
        assert result["max_delay"] >= -1
        assert result["corollary1_factor"] > 2.0

    def test_check_corollary_file(self, service, mock_repository):
        trace = Trace()
        trace.append(TraceRecord(0, 0, 1.0, 1.0, 0, sum_v_sq=2.0, sum_u_sq=2.0))
        trace.append(TraceRecord(1, 0, 0.5, 0.5, 10))
        mock_repository.load_trace.return_value = trace
        report = service.check_corollary_file(Path("trace.csv"), _cfg())
        assert report.all_passed
        assert report.factor == 2.0
