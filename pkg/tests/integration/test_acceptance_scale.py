"""
인수 기준 규모 실험 (pytest -m slow)

10개 시드에 걸친 에르고딕 상한, 유계 지연 수렴, SGD / SVRG / 웜스타트 순서.
"""

import statistics

import pytest

from core.domain.models import DelayModel, SyntheticSpec, TheoryParams
from core.domain.problems import LeastSquaresProblem, LogisticNonconvexProblem
from core.domain.run_config import RunConfig
from core.domain.solver_configs import DistributedConfig, SharedConfig, SvrgConfig
from core.services.corollary_check import check_corollary1
from core.services.distributed_async_service import DistributedAsyncService
from core.services.experiment_service import ExperimentService
from core.services.problem_diagnostics import estimate_L
from core.services.serial_solvers import SerialSolverService
from core.services.shared_async_service import SharedAsyncService
from core.services.staleness import make_staleness_schedule
from core.services.theory_service import max_delay
from infra.adapters.data.dataset_provider import DatasetProvider
from infra.adapters.data.idx_dataset_adapter import IdxDatasetAdapter
from infra.adapters.data.synthetic_dataset_adapter import SyntheticDatasetAdapter
from infra.adapters.storage.artifact_repository import FileArtifactRepository
from infra.adapters.utils.clocks import LogicalClock, WallClock
from config import config

pytestmark = pytest.mark.slow

SEEDS = range(10)


@pytest.fixture
def harness(mock_logger, tmp_path):
    provider = DatasetProvider(
        idx_reader=IdxDatasetAdapter(),
        synthetic=SyntheticDatasetAdapter(),
        logger=mock_logger,
        base_dir=config.BASE_DIR,
    )
    return ExperimentService(
        dataset_provider=provider,
        repository=FileArtifactRepository(),
        logger=mock_logger,
        clocks={"logical": LogicalClock(), "wall": WallClock()},
        output_root=tmp_path,
    )


def test_ergodic_bound_holds_with_recommended_settings(harness):
    measured, bounds = [], []
    for seed in SEEDS:
        cfg = RunConfig(
            problem="least_squares", n=1000, p=50, S=5, b=10, seed=seed,
            use_theory_settings=True, grad_stride=1,
        )
        summary = harness.run_experiment(cfg).summary
        assert summary.theory is not None and summary.theory.feasible
        assert summary.theory.bound_label == "exact f*"
        measured.append(summary.theory.measured_ergodic_grad_norm_sq)
        bounds.append(summary.theory.ergodic_bound)

    assert statistics.mean(measured) <= min(bounds)


def _least_squares(seed: int) -> LeastSquaresProblem:
    spec = SyntheticSpec(n=1000, p=50, noise=0.1, seed=seed, task="regression")
    return LeastSquaresProblem(SyntheticDatasetAdapter().generate(spec))


def _logistic(seed: int) -> LogisticNonconvexProblem:
    spec = SyntheticSpec(n=1000, p=50, noise=0.1, seed=seed)
    return LogisticNonconvexProblem(SyntheticDatasetAdapter().generate(spec), nonconvex_weight=0.1)


@pytest.mark.parametrize("make_problem", [_least_squares, _logistic], ids=["least_squares", "logistic"])
def test_bounded_delay_runs_stay_close_to_serial(mock_logger, make_problem):
    S, m, b = 3, 200, 1
    shared_delta = max_delay("shared", 0.1, b, 50) // 2
    dist_delta = max_delay("distributed", 0.05, b) // 2
    assert shared_delta >= 1 and dist_delta >= 1

    serial_g, shared_g, dist_g = [], [], []
    for seed in SEEDS:
        problem = make_problem(seed)
        L = estimate_L(problem, seed=seed)
        eta = 0.05 / L

        serial = SerialSolverService(mock_logger, LogicalClock()).run_serial_svrg(
            problem, SvrgConfig(S=S, m=m, b=b, eta=eta, seed=seed)
        )
        shared = SharedAsyncService(mock_logger, LogicalClock()).run_shared_async(
            problem,
            SharedConfig(
                S=S, m=m, b=b, eta=eta, seed=seed, mode="replay",
                schedule=make_staleness_schedule(S, m, shared_delta, "adversarial_max"),
            ),
        )
        dist = DistributedAsyncService(mock_logger, LogicalClock()).run_distributed(
            problem,
            DistributedConfig(
                S=S, m=m, b=b, eta=eta, num_workers=2, seed=seed,
                delay=DelayModel("fixed", dist_delta),
            ),
        )
        for trace in (serial, shared, dist):
            assert not trace.diverged

        for trace, delta, mode in ((shared, shared_delta, "shared"), (dist, dist_delta, "distributed")):
            p = TheoryParams(
                L=L, eta=eta, beta=2 * L, b=b, m=m, d=problem.d, n=problem.n, Delta=delta, mode=mode
            )
            assert check_corollary1(trace, p).all_passed

        serial_g.append(serial.final_grad_norm_sq)
        shared_g.append(shared.final_grad_norm_sq)
        dist_g.append(dist.final_grad_norm_sq)

    assert statistics.median(shared_g) <= 4 * statistics.median(serial_g)
    assert statistics.median(dist_g) <= 4 * statistics.median(serial_g)


def test_svrg_beats_sgd_and_warm_start_helps_on_mlp(harness):
    base = dict(
        problem="mlp", data_source="idx", data_limit=2000, p=50, num_classes=10,
        hidden=16, b=10, m=200, eta=0.05, S=6, lam=1e-4, C=1e-4,
    )
    wins_svrg = wins_warm = 0
    for seed in SEEDS:
        sgd = harness.execute(
            RunConfig(**base, seed=seed, method="sgd", sgd_alpha_grid=(0.01, 0.05, 0.1), sgd_beta_grid=(0.0, 0.5))
        )
        svrg = harness.execute(RunConfig(**base, seed=seed, method="svrg"))
        warm = harness.execute(
            RunConfig(
                **{**base, "S": base["S"] - 1}, seed=seed, method="sgd_then_svrg", sgd_epochs=1,
                sgd_alpha=0.05, sgd_beta=0.5,
            )
        )
        assert not svrg.trace.diverged
        wins_svrg += svrg.trace.final_loss <= sgd.trace.final_loss
        wins_warm += warm.trace.final_loss <= svrg.trace.final_loss

    assert wins_svrg >= 7
    assert wins_warm >= 7
