"""
실험 하네스 서비스

run_experiment : 설정 하나를 알맞은 실행기로 보내고 Trace / summary / 부가 파일 기록
sweep_workers  : 워커 수별 순차 실행, 목표 손실 도달 시간, speedup 표
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from core.domain.errors import ConfigError, InfeasibleParametersError, InvalidInputError
from core.domain.experiment_models import (
    Corollary1Report,
    ExperimentArtifacts,
    ExperimentSummary,
    SgdGridResult,
    SweepRow,
    TheoryVerdict,
)
from core.domain.messages import EventRecord
from core.domain.models import (
    DatasetBundle,
    ParamVector,
    SgdSchedule,
    StalenessSchedule,
    TheoryParams,
    Trace,
)
from core.domain.problems import FiniteSumProblem, make_problem
from core.domain.run_config import RunConfig
from core.domain.solver_configs import DistributedConfig, SgdConfig, SharedConfig, SvrgConfig
from core.ports.data_ports import DatasetProviderPort
from core.ports.repository_ports import ArtifactRepositoryPort
from core.ports.utility_ports import ClockPort, LoggerPort
from core.services.corollary_check import check_corollary1
from core.services.distributed_async_service import DistributedAsyncService
from core.services.problem_diagnostics import estimate_L, exact_fstar
from core.services.serial_solvers import SerialSolverService
from core.services.shared_async_service import SharedAsyncService
from core.services.staleness import format_schedule, make_delay_model, make_staleness_schedule
from core.services.theory_service import (
    corollary1_factor,
    delay_bound,
    max_delay,
    recommended_settings,
    report_as_dict,
    side_condition_holds,
    speedup,
    theory_report,
)

SPEEDUP_TARGET_FACTOR = 1.01


def sgd_iterations_per_epoch(n: int, b: int, m: int) -> int:
    """
    SVRG epoch 하나와 같은 데이터 패스가 되는 SGD 반복 수

    SVRG epoch = 전체 그래디언트 n + 내부 반복 m × 2b, SGD 반복 = b
    """
    return math.ceil(n / b) + 2 * m


def time_to_target(trace: Trace, target: float) -> Optional[int]:
    """손실이 처음으로 target 이하가 된 레코드의 시간 (도달하지 못하면 None)"""
    for record in trace.records:
        if record.loss <= target:
            return max(record.wall_ns, 1)
    return None


@dataclass(frozen=True)
class ResolvedSettings:
    """실제로 사용한 (L, η, β, m)"""

    L: float
    eta: float
    beta: float
    m: int


@dataclass
class RunOutcome:
    """실행 한 번의 결과 (파일 기록 전)"""

    cfg: RunConfig
    bundle: DatasetBundle
    problem: FiniteSumProblem
    settings: ResolvedSettings
    trace: Trace
    warmup: Optional[Trace] = None
    sgd_grid: List[SgdGridResult] = field(default_factory=list)
    schedule: Optional[StalenessSchedule] = None
    events: List[EventRecord] = field(default_factory=list)


class ExperimentService:
    """
    실험 하네스

    책임:
        - RunConfig → 데이터 / 문제 / (L, η, β, m) 결정
        - method 와 architecture 에 따라 실행기 선택, SGD 격자와 웜스타트 처리
        - 이론 판정, Σ‖v‖² 대 Σ‖u‖² 검사, 산출물 기록
    하네스 자체는 단일 스레드이며 스윕도 설정을 하나씩 순서대로 실행한다.
    """

    def __init__(
        self,
        dataset_provider: DatasetProviderPort,
        repository: ArtifactRepositoryPort,
        logger: LoggerPort,
        clocks: Mapping[str, ClockPort],
        output_root: Path,
        divergence_threshold: float = 1e12,
    ):
        self.dataset_provider = dataset_provider
        self.repository = repository
        self.logger = logger
        self.clocks = clocks
        self.output_root = output_root
        self.divergence_threshold = divergence_threshold

    # ------------------------------------------------------------------ #
    #  준비                                                                #
    # ------------------------------------------------------------------ #

    def prepare(self, cfg: RunConfig) -> Tuple[DatasetBundle, FiniteSumProblem]:
        bundle = self.dataset_provider.load(cfg)
        problem = make_problem(
            cfg.problem,
            bundle.train,
            regularization_weight=cfg.C,
            nonconvex_weight=cfg.lam,
            hidden=cfg.hidden,
        )
        self.logger.info(f"📦 문제 {cfg.problem}: n={problem.n}, d={problem.d}")
        return bundle, problem

    def resolve_settings(self, cfg: RunConfig, problem: FiniteSumProblem) -> ResolvedSettings:
        """
        use_theory_settings 면 이론 권장 (η, β, m), 아니면 설정값 (β 미지정 시 2L)

        Raises:
            InvalidInputError: L 추정값이 양수가 아니거나 권장 m 이 0
        """
        L = cfg.lipschitz if cfg.lipschitz is not None else estimate_L(problem, seed=cfg.seed)
        if not L > 0:
            raise InvalidInputError(f"Lipschitz 상수가 양수가 아님: {L}")
        if cfg.use_theory_settings:
            eta, beta, m = recommended_settings(
                cfg.theory_mode, problem.n, cfg.alpha_exp, cfg.u0, cfg.b, problem.d, L
            )
            self.logger.info(f"📐 이론 권장값: η={eta:.6g}, β={beta:.6g}, m={m} (L={L:.6g})")
            return ResolvedSettings(L=L, eta=eta, beta=beta, m=m)
        beta = cfg.beta if cfg.beta is not None else 2.0 * L
        return ResolvedSettings(L=L, eta=cfg.eta, beta=beta, m=cfg.m)

    def theory_params(
        self, cfg: RunConfig, problem: FiniteSumProblem, settings: ResolvedSettings
    ) -> TheoryParams:
        delta = 0 if cfg.architecture == "serial" else cfg.delta
        return TheoryParams(
            L=settings.L,
            eta=settings.eta,
            beta=settings.beta,
            b=cfg.b,
            m=settings.m,
            d=problem.d,
            n=problem.n,
            Delta=delta,
            u0=cfg.u0,
            alpha=cfg.alpha_exp,
            mode=cfg.theory_mode,
        )

    # ------------------------------------------------------------------ #
    #  실행                                                                #
    # ------------------------------------------------------------------ #

    def _clock(self, cfg: RunConfig) -> ClockPort:
        return self.clocks[cfg.clock]

    def _run_sgd_grid(
        self, problem: FiniteSumProblem, cfg: RunConfig, epochs: int, m: int
    ) -> Tuple[Trace, List[SgdGridResult]]:
        """격자의 모든 (α, β) 실행, 최종 학습 손실이 가장 작은 비발산 Trace 선택"""
        solver = SerialSolverService(self.logger, self._clock(cfg), self.divergence_threshold)
        iters = sgd_iterations_per_epoch(problem.n, cfg.b, m)
        best: Optional[Trace] = None
        last: Optional[Trace] = None
        results: List[SgdGridResult] = []

        for alpha, beta in cfg.sgd_grid():
            trace = solver.run_sgd(
                problem,
                SgdConfig(
                    epochs=epochs,
                    iters_per_epoch=iters,
                    b=cfg.b,
                    sched=SgdSchedule(alpha=alpha, beta=beta),
                    seed=cfg.seed,
                    grad_stride=cfg.grad_stride,
                ),
            )
            final = None if trace.diverged else trace.final_loss
            results.append(
                SgdGridResult(alpha=alpha, beta=beta, final_loss=final, diverged=trace.diverged)
            )
            self.logger.info(f"[SGD 격자] α={alpha:g}, β={beta:g} → loss={final}")
            last = trace
            if not trace.diverged and (best is None or trace.final_loss < best.final_loss):
                best = trace

        assert last is not None
        return (best or last), results

    def _run_svrg(
        self,
        problem: FiniteSumProblem,
        cfg: RunConfig,
        settings: ResolvedSettings,
        x0: Optional[ParamVector],
    ) -> Tuple[Trace, Optional[StalenessSchedule], List[EventRecord]]:
        clock = self._clock(cfg)

        if cfg.architecture == "serial":
            solver = SerialSolverService(self.logger, clock, self.divergence_threshold)
            trace = solver.run_serial_svrg(
                problem,
                SvrgConfig(
                    S=cfg.S,
                    m=settings.m,
                    b=cfg.b,
                    eta=settings.eta,
                    seed=cfg.seed,
                    warm_start_x=x0,
                    block_size=cfg.block,
                    grad_stride=cfg.grad_stride,
                ),
            )
            return trace, None, []

        if cfg.architecture == "shared":
            schedule = None
            if cfg.shared_mode == "replay":
                schedule = make_staleness_schedule(
                    cfg.S, settings.m, cfg.delta, cfg.schedule_model, seed=cfg.seed
                )
            elif cfg.schedule_model != "none":
                self.logger.warning("⚠️ live 모드는 스케줄을 쓰지 않음 (schedule_model 무시)")
            shared = SharedAsyncService(self.logger, clock, self.divergence_threshold)
            trace = shared.run_shared_async(
                problem,
                SharedConfig(
                    S=cfg.S,
                    m=settings.m,
                    b=cfg.b,
                    eta=settings.eta,
                    block_size=cfg.block,
                    num_workers=cfg.num_workers,
                    seed=cfg.seed,
                    mode=cfg.shared_mode,
                    schedule=schedule,
                    warm_start_x=x0,
                    grad_stride=cfg.grad_stride,
                ),
            )
            return trace, schedule, []

        events: List[EventRecord] = []
        distributed = DistributedAsyncService(self.logger, clock, self.divergence_threshold)
        trace = distributed.run_distributed(
            problem,
            DistributedConfig(
                S=cfg.S,
                m=settings.m,
                b=cfg.b,
                eta=settings.eta,
                num_workers=cfg.num_workers,
                delay=make_delay_model(cfg.delay_kind, cfg.delta, cfg.seed),
                seed=cfg.seed,
                mode=cfg.dist_mode,
                latency=cfg.latency,
                warm_start_x=x0,
                grad_stride=cfg.grad_stride,
            ),
            event_log=events if cfg.event_log else None,
        )
        return trace, None, events

    def execute(
        self,
        cfg: RunConfig,
        prepared: Optional[Tuple[DatasetBundle, FiniteSumProblem]] = None,
    ) -> RunOutcome:
        """파일을 쓰지 않고 설정 하나를 실행"""
        bundle, problem = prepared or self.prepare(cfg)
        settings = self.resolve_settings(cfg, problem)

        if cfg.method == "sgd":
            trace, grid = self._run_sgd_grid(problem, cfg, cfg.S, settings.m)
            return RunOutcome(cfg, bundle, problem, settings, trace, sgd_grid=grid)

        warmup: Optional[Trace] = None
        grid: List[SgdGridResult] = []
        x0: Optional[ParamVector] = None
        if cfg.method == "sgd_then_svrg" and cfg.sgd_epochs > 0:
            warmup, grid = self._run_sgd_grid(problem, cfg, cfg.sgd_epochs, settings.m)
            if warmup.diverged:
                self.logger.warning("⚠️ 웜스타트 SGD 가 모든 격자점에서 발산 - SVRG 는 초기점에서 시작")
            else:
                x0 = warmup.final_x

        trace, schedule, events = self._run_svrg(problem, cfg, settings, x0)
        return RunOutcome(
            cfg,
            bundle,
            problem,
            settings,
            trace,
            warmup=warmup,
            sgd_grid=grid,
            schedule=schedule,
            events=events,
        )

    # ------------------------------------------------------------------ #
    #  판정                                                                #
    # ------------------------------------------------------------------ #

    def _theory_verdict(self, outcome: RunOutcome) -> TheoryVerdict:
        cfg, problem, trace = outcome.cfg, outcome.problem, outcome.trace
        p = self.theory_params(cfg, problem, outcome.settings)
        base: Dict[str, Any] = dict(
            mode=p.mode, L=p.L, eta=p.eta, beta=p.beta, m=p.m, delta=p.Delta
        )
        base["delay_bound"] = delay_bound(p.mode, cfg.u0, cfg.b, p.d)
        base["side_condition_ok"] = side_condition_holds(
            p.mode, p.n, cfg.alpha_exp, cfg.u0, cfg.b, p.d, p.Delta
        )
        measured = trace.ergodic_grad_norm_sq()
        base["measured_ergodic_grad_norm_sq"] = None if math.isnan(measured) else measured

        f0 = fstar = None
        T = None
        exact = exact_fstar(problem)
        if trace.records and not trace.diverged and cfg.S * p.m >= 1:
            f0 = trace.records[0].loss
            fstar = exact if exact is not None else min(r.loss for r in trace.records)
            T = cfg.S * p.m

        try:
            report = theory_report(p, f0=f0, fstar=fstar, T=T, diagnostic_only=exact is None)
        except InfeasibleParametersError as e:
            message = str(e)
            return TheoryVerdict(
                **base,
                feasible=False,
                note=message,
                error=message if cfg.use_theory_settings else "",
            )

        note = ""
        error = ""
        if not report.feasible:
            note = f"γ={report.gamma:.6g} ≤ 0 - 에르고딕 상한 없음"
            if cfg.use_theory_settings:
                error = note
        return TheoryVerdict(
            **base,
            feasible=report.feasible,
            gamma=report.gamma,
            lyapunov_condition_ok=report.lyapunov_condition_ok,
            ergodic_bound=report.bound_value,
            bound_label=report.bound_label,
            note=note,
            error=error,
        )

    def _corollary(self, outcome: RunOutcome) -> Optional[Corollary1Report]:
        """Σ‖u‖² 가 측정된 실행(직렬, replay, 시뮬레이션)만"""
        trace = outcome.trace
        if trace.diverged:
            return None
        sums = trace.epoch_sums()
        if not sums or any(math.isnan(sum_u) for _, _, sum_u in sums):
            return None
        p = self.theory_params(outcome.cfg, outcome.problem, outcome.settings)
        return check_corollary1(trace, p)

    def _clock_label(self, cfg: RunConfig) -> Tuple[str, str]:
        if cfg.architecture == "distributed" and cfg.dist_mode == "simulated":
            return "simulated", "이산 사건 시뮬레이션 시간 (표본 그래디언트 1개 = 1 단위)"
        if cfg.clock == "logical":
            return "logical", "표본 그래디언트 계산 수 (스냅샷 전체 그래디언트 포함)"
        return "wall", "ns, 데이터 적재 제외, 스냅샷 전체 그래디언트 포함"

    def _summarize(self, outcome: RunOutcome, artifacts: Dict[str, str]) -> ExperimentSummary:
        cfg, problem, trace = outcome.cfg, outcome.problem, outcome.trace
        train_error = test_error = None
        x = trace.final_x
        if not trace.diverged and x is not None and np.all(np.isfinite(x)):
            train_error = problem.error_rate(x)
            if outcome.bundle.test is not None:
                test_error = problem.error_rate(x, outcome.bundle.test)

        clock, note = self._clock_label(cfg)
        is_svrg = cfg.method != "sgd"
        return ExperimentSummary(
            problem=cfg.problem,
            architecture=cfg.architecture,
            n=problem.n,
            d=problem.d,
            final_loss=trace.final_loss if trace.records else None,
            final_grad_norm_sq=trace.final_grad_norm_sq if trace.records else None,
            train_error=train_error,
            test_error=test_error,
            clock=clock,
            elapsed=trace.records[-1].wall_ns if trace.records else 0,
            wall_time_note=note,
            diverged=trace.diverged,
            diagnostic=trace.diagnostic,
            warm_start_epochs=cfg.sgd_epochs if outcome.warmup is not None else 0,
            sgd_grid=outcome.sgd_grid,
            theory=self._theory_verdict(outcome) if is_svrg else None,
            corollary1=self._corollary(outcome) if is_svrg else None,
            artifacts=artifacts,
            extras=dict(trace.extras),
        )

    # ------------------------------------------------------------------ #
    #  공개 연산                                                           #
    # ------------------------------------------------------------------ #

    def output_dir(self, cfg: RunConfig) -> Path:
        return Path(cfg.output_dir) if cfg.output_dir else self.output_root

    def run_experiment(self, cfg: RunConfig) -> ExperimentArtifacts:
        """
        실행 + 산출물 기록

        trace.csv, (웜스타트) trace_warmup.csv, (replay) schedule.txt,
        (event_log) events.log, summary.json
        """
        outcome = self.execute(cfg)
        out = self.output_dir(cfg)
        paths: Dict[str, Path] = {}

        if outcome.warmup is not None:
            paths["trace_warmup"] = self.repository.save_trace(out, outcome.warmup, "trace_warmup.csv")
        paths["trace"] = self.repository.save_trace(out, outcome.trace)
        if outcome.schedule is not None:
            paths["schedule"] = self.repository.save_text(
                out, "schedule.txt", format_schedule(outcome.schedule)
            )
        if outcome.events:
            lines = "\n".join(event.as_line() for event in outcome.events) + "\n"
            paths["events"] = self.repository.save_text(out, "events.log", lines)

        summary = self._summarize(outcome, {key: path.name for key, path in paths.items()})
        paths["summary"] = self.repository.save_summary(out, summary)

        for key, path in paths.items():
            self.logger.info(f"💾 {key}: {path}")
        if outcome.trace.diverged:
            self.logger.error(f"❌ 발산: {outcome.trace.diagnostic}")
        return ExperimentArtifacts(
            output_dir=out, summary=summary, paths=paths, exit_ok=summary.succeeded
        )

    def _with_workers(self, cfg: RunConfig, workers: int) -> RunConfig:
        try:
            return RunConfig.model_validate({**cfg.model_dump(), "num_workers": workers})
        except ValidationError as e:
            raise ConfigError(
                f"num_workers={workers} 설정이 유효하지 않음",
                [f"{err['loc'][0] if err['loc'] else 'config'}: {err['msg']}" for err in e.errors()],
            ) from e

    def sweep_workers(
        self, cfg: RunConfig, counts: Sequence[int]
    ) -> Tuple[List[SweepRow], Path]:
        """
        워커 수별 실행 → speedup.csv (+ 워커 수별 trace_w{T}.csv)

        목표 손실 = 1 워커 최종 손실 × 1.01, 시간 = 목표에 처음 도달한 레코드의 시각.
        발산하거나 목표에 닿지 못한 행은 speedup 이 비어 있다.

        Raises:
            InvalidInputError: counts 에 1 이 없음
        """
        worker_counts = sorted(set(counts))
        if 1 not in worker_counts:
            raise InvalidInputError(f"counts 에 1 (직렬 기준) 이 있어야 함: {list(counts)}")
        if any(c < 1 for c in worker_counts):
            raise InvalidInputError(f"워커 수는 1 이상이어야 함: {list(counts)}")

        configs = {c: self._with_workers(cfg, c) for c in worker_counts}
        prepared = self.prepare(cfg)
        out = self.output_dir(cfg)
        traces: Dict[int, Trace] = {}
        for c in worker_counts:
            self.logger.info(f"[Sweep] 워커 {c}개 실행")
            traces[c] = self.execute(configs[c], prepared).trace
            self.repository.save_trace(out, traces[c], f"trace_w{c}.csv")

        reference = traces[1]
        target = None if reference.diverged else reference.final_loss * SPEEDUP_TARGET_FACTOR
        times: Dict[int, Optional[int]] = {}
        for c, trace in traces.items():
            times[c] = None if trace.diverged or target is None else time_to_target(trace, target)

        reached = {c: float(t) for c, t in times.items() if t is not None}
        ratios = speedup(reached) if 1 in reached else {}
        rows = [
            SweepRow(
                workers=c,
                time_to_target=reached.get(c),
                reached_target=c in reached,
                final_loss=None if traces[c].diverged else traces[c].final_loss,
                diverged=traces[c].diverged,
                speedup=ratios.get(c),
            )
            for c in worker_counts
        ]
        table = pd.DataFrame([row.model_dump() for row in rows])
        path = self.repository.save_table(out, "speedup.csv", table)
        self.logger.info(f"💾 speedup: {path}")
        return rows, path

    def analyze_theory(self, cfg: RunConfig) -> Dict[str, Any]:
        """
        설정에 대한 이론 계산 (실행 없음)

        Raises:
            InfeasibleParametersError: 분모가 양수가 아님
        """
        _, problem = self.prepare(cfg)
        settings = self.resolve_settings(cfg, problem)
        p = self.theory_params(cfg, problem, settings)
        report = theory_report(p)
        return {
            "params": {
                "L": p.L, "eta": p.eta, "beta": p.beta, "b": p.b, "m": p.m,
                "d": p.d, "n": p.n, "Delta": p.Delta, "mode": p.mode,
            },
            "report": report_as_dict(report),
            "delay_bound": delay_bound(p.mode, cfg.u0, cfg.b, p.d),
            "max_delay": max_delay(p.mode, cfg.u0, cfg.b, p.d),
            "side_condition_ok": side_condition_holds(
                p.mode, p.n, cfg.alpha_exp, cfg.u0, cfg.b, p.d, p.Delta
            ),
            "corollary1_factor": corollary1_factor(p),
        }

    def check_corollary_file(self, trace_path: Path, cfg: RunConfig) -> Corollary1Report:
        """저장된 Trace CSV 에 대해 Σ‖v‖² ≤ factor·Σ‖u‖² 검사"""
        trace = self.repository.load_trace(trace_path)
        _, problem = self.prepare(cfg)
        settings = self.resolve_settings(cfg, problem)
        return check_corollary1(trace, self.theory_params(cfg, problem, settings))
