"""
직렬 기준 실행기: 미니배치 SGD, 직렬 SVRG
"""

import numpy as np

from core.domain.models import ParamVector, Trace
from core.domain.problems import FiniteSumProblem
from core.domain.solver_configs import SgdConfig, SvrgConfig
from core.ports.utility_ports import ClockPort, LoggerPort
from core.services.variance_reduction import (
    SGD_STREAM,
    TraceRecorder,
    batch_mean_grad,
    ideal_vr_gradient,
    make_rng,
    poly_lr,
    sample_block,
    sample_minibatch,
    squared_norm,
    take_snapshot,
)


def apply_dense_or_block(
    x: ParamVector, v: ParamVector, eta: float, coords: np.ndarray | None
) -> ParamVector:
    """x ← x − η v (coords 가 주어지면 해당 좌표만)"""
    if coords is None:
        return x - eta * v
    x[coords] = x[coords] - eta * v[coords]
    return x


def is_finite(x: ParamVector) -> bool:
    return bool(np.all(np.isfinite(x)))


class SerialSolverService:
    """
    직렬 SGD / SVRG 실행 서비스

    책임:
        - 비동기 실행기의 비교 기준 궤적 생성
        - SGD→SVRG 웜스타트의 SGD 구간
    """

    def __init__(
        self,
        logger: LoggerPort,
        clock: ClockPort,
        divergence_threshold: float = 1e12,
    ) -> None:
        self.logger = logger
        self.clock = clock
        self.divergence_threshold = divergence_threshold

    def _recorder(self, problem: FiniteSumProblem, grad_stride: int, m: int) -> TraceRecorder:
        return TraceRecorder(
            problem,
            self.clock,
            divergence_threshold=self.divergence_threshold,
            grad_stride=grad_stride,
            m=m,
        )

    def run_sgd(self, problem: FiniteSumProblem, cfg: SgdConfig) -> Trace:
        """
        미니배치 SGD, epoch s 에서 η_s = α/(1+s)^β

        epoch 시작마다 (loss, ‖∇f‖²) 를 기록하고, epochs=0 이면 초기 레코드 하나만 남는다.
        """
        x = problem.initial_point(cfg.seed) if cfg.x0 is None else np.array(cfg.x0, dtype=np.float64)
        rng = make_rng(cfg.seed, SGD_STREAM)
        recorder = self._recorder(problem, cfg.grad_stride, cfg.iters_per_epoch)
        self.clock.start()

        for s in range(cfg.epochs):
            if not is_finite(x):
                recorder.diverge(f"epoch {s}: 파라미터가 유한하지 않음")
                break
            snap = take_snapshot(problem, x, s)
            if not recorder.begin_epoch(snap):
                break
            eta = poly_lr(cfg.sched, s)

            for t in range(cfg.iters_per_epoch):
                batch = sample_minibatch(rng, problem.n, cfg.b)
                g = batch_mean_grad(problem, x, batch)
                self.clock.advance(batch.b)
                if not recorder.accumulate(squared_norm(g)):
                    break
                x = x - eta * g
                if recorder.wants_point(t) and not recorder.record_point(s, t, x):
                    break
            if recorder.diverged:
                break
            recorder.end_epoch()
            self.logger.info(
                f"[SGD] epoch {s + 1}/{cfg.epochs} η={eta:.3g} 종료 loss={problem.eval_loss(x):.6g}"
            )

        trace = recorder.finish(x, cfg.epochs)
        if trace.diverged:
            self.logger.warning(f"⚠️  SGD 발산: {trace.diagnostic}")
        return trace

    def run_serial_svrg(self, problem: FiniteSumProblem, cfg: SvrgConfig) -> Trace:
        """
        직렬 SVRG (블록 좌표 갱신 선택 가능)

        epoch 마다 스냅샷과 μ 를 계산한 뒤 m 번 x ← x − η·u 를 수행하고
        x^{s+1} ← x_m^{s+1} 로 다음 epoch 을 시작한다. 직렬 실행에서는 v = u.
        """
        if cfg.warm_start_x is None:
            x = problem.initial_point(cfg.seed)
        else:
            x = np.array(problem.check_x(cfg.warm_start_x), dtype=np.float64, copy=True)
        rng = make_rng(cfg.seed, 0)
        recorder = self._recorder(problem, cfg.grad_stride, cfg.m)
        self.clock.start()

        for s in range(cfg.S):
            if not is_finite(x):
                recorder.diverge(f"epoch {s}: 파라미터가 유한하지 않음")
                break
            snap = take_snapshot(problem, x, s)
            self.clock.advance(problem.n)
            if not recorder.begin_epoch(snap):
                break
            x = snap.x_tilde.copy()

            for t in range(cfg.m):
                batch = sample_minibatch(rng, problem.n, cfg.b)
                u = ideal_vr_gradient(problem, x, snap, batch)
                self.clock.advance(2 * batch.b)
                u_sq = squared_norm(u)
                if not recorder.accumulate(u_sq, u_sq):
                    break
                coords = sample_block(rng, problem.d, cfg.block_size)
                x = apply_dense_or_block(x, u, cfg.eta, coords)
                if recorder.wants_point(t) and not recorder.record_point(s, t, x):
                    break
            if recorder.diverged:
                break
            recorder.end_epoch()
            self.logger.info(
                f"[SVRG] epoch {s + 1}/{cfg.S} 종료 loss={problem.eval_loss(x):.6g}"
            )

        trace = recorder.finish(x, cfg.S)
        if trace.diverged:
            self.logger.warning(f"⚠️  SVRG 발산: {trace.diagnostic}")
        return trace
