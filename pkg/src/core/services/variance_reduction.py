"""
분산감소(VR) 그래디언트 커널과 공용 실행 도구

세 실행기(직렬, 공유 메모리, 분산)가 같은 결합식
    v = mean ∇f_i(x̂) + (μ − mean ∇f_i(x̃))
을 쓰므로, 지연이 0 이면 실행기 간 궤적이 비트 단위로 같다.
"""

import math
from typing import List, Optional

import numpy as np

from core.domain.errors import InvalidInputError
from core.domain.models import (
    MiniBatch,
    ParamVector,
    SgdSchedule,
    Snapshot,
    StaleReads,
    Trace,
    TraceRecord,
)
from core.domain.problems import FiniteSumProblem, ordered_sum
from core.ports.utility_ports import ClockPort

# SGD 웜업 전용 난수 스트림 (워커 id 와 겹치지 않음)
SGD_STREAM = 1_000_003


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """(seed, stream) 으로 파생한 독립 난수 생성기"""
    return np.random.default_rng([seed, stream])


def take_snapshot(problem: FiniteSumProblem, x: ParamVector, s: int) -> Snapshot:
    x_tilde = np.array(x, dtype=np.float64, copy=True)
    return Snapshot(x_tilde=x_tilde, mu=problem.grad_full(x_tilde), epoch=s)


def sample_minibatch(rng: np.random.Generator, n: int, b: int) -> MiniBatch:
    """복원 균등 추출. b ≥ n 이면 전체 표본을 순서대로 (난수 소비 없음)"""
    if b >= n:
        return MiniBatch(indices=tuple(range(n)))
    return MiniBatch(indices=tuple(int(i) for i in rng.integers(0, n, size=b)))


def sample_block(
    rng: np.random.Generator, d: int, block_size: Optional[int]
) -> Optional[np.ndarray]:
    """갱신할 좌표 블록. None 이면 전체 좌표 (난수 소비 없음)"""
    if block_size is None or block_size >= d:
        return None
    return np.sort(rng.choice(d, size=block_size, replace=False))


def batch_mean_grad(
    problem: FiniteSumProblem, x: ParamVector, batch: MiniBatch
) -> ParamVector:
    """(1/b) Σ_{i∈I_t} ∇f_i(x), 배치 순서대로 합산"""
    return problem.sum_grad(x, batch.as_array()) / batch.b


def combine_vr(g_stale: ParamVector, g_snap: ParamVector, mu: ParamVector) -> ParamVector:
    """
    v = g_stale + (μ − g_snap)

    g_stale 와 g_snap 이 같은 좌표는 μ 를 그대로 쓴다 (x̂ = x̃ 이면 v = μ 가 정확히 성립).
    g_snap = μ (전체 배치) 이면 v = g_stale 가 정확히 성립한다.
    """
    return np.where(g_stale == g_snap, mu, g_stale + (mu - g_snap))


def vr_gradient(
    problem: FiniteSumProblem,
    stale: StaleReads,
    snap: Snapshot,
    batch: MiniBatch,
) -> ParamVector:
    if len(stale.vectors) != batch.b or len(stale.tau) != batch.b:
        raise InvalidInputError(
            f"stale 읽기 개수({len(stale.vectors)})와 배치 크기({batch.b})가 다름"
        )
    if batch.b == 0:
        raise InvalidInputError("빈 미니배치")

    if stale.is_shared():
        g_stale = batch_mean_grad(problem, stale.vectors[0], batch)
    else:
        rows = (
            problem.grad_rows(vec, [i])[0] for vec, i in zip(stale.vectors, batch.indices)
        )
        g_stale = ordered_sum(rows, problem.d) / batch.b
    g_snap = batch_mean_grad(problem, snap.x_tilde, batch)
    return combine_vr(g_stale, g_snap, snap.mu)


def ideal_vr_gradient(
    problem: FiniteSumProblem,
    x_current: ParamVector,
    snap: Snapshot,
    batch: MiniBatch,
) -> ParamVector:
    """모든 stale 읽기를 일관된 x_current 로 바꾼 u_t"""
    return vr_gradient(problem, StaleReads.uniform(x_current, batch.b), snap, batch)


def poly_lr(sched: SgdSchedule, s: int) -> float:
    """η_s = α/(1+s)^β"""
    if s < 0:
        raise InvalidInputError(f"epoch 는 0 이상이어야 함: {s}")
    return sched.alpha / (1.0 + s) ** sched.beta


def squared_norm(v: ParamVector) -> float:
    return float(v @ v)


class TraceRecorder:
    """
    실행기 공용 Trace 작성기 (단일 작성자)

    발산 판정: 기록 시점의 손실이 임계값을 넘거나 유한하지 않을 때,
    또는 v / x 가 유한하지 않을 때. 발산하면 diverged 로 표시하고 이후 기록은 무시한다.
    """

    def __init__(
        self,
        problem: FiniteSumProblem,
        clock: ClockPort,
        divergence_threshold: float = 1e12,
        grad_stride: int = 0,
        m: int = 1,
    ) -> None:
        self.problem = problem
        self.clock = clock
        self.threshold = divergence_threshold
        self.grad_stride = grad_stride
        self.m = m
        self.trace = Trace()
        self._epoch_index: Optional[int] = None
        self._sum_v = 0.0
        self._sum_u: Optional[float] = 0.0

    @property
    def diverged(self) -> bool:
        return self.trace.diverged

    def diverge(self, diagnostic: str) -> None:
        if not self.trace.diverged:
            self.trace.diverged = True
            self.trace.diagnostic = diagnostic

    def _append(self, epoch: int, it: int, loss: float, grad_norm_sq: float) -> bool:
        index = self.trace.append(
            TraceRecord(
                epoch=epoch,
                iter=it,
                loss=loss,
                grad_norm_sq=grad_norm_sq,
                wall_ns=self.clock.elapsed_ns(),
            )
        )
        if not math.isfinite(loss) or loss > self.threshold:
            self.diverge(f"epoch {epoch} iter {it}: 손실 {loss!r} 이 발산 임계값 {self.threshold:g} 초과")
            return False
        if it == 0:
            self._epoch_index = index
        return True

    def begin_epoch(self, snap: Snapshot) -> bool:
        """스냅샷 레코드 (loss f(x̃), ‖μ‖²) 기록. 발산이면 False"""
        if self.diverged:
            return False
        self._sum_v = 0.0
        self._sum_u = 0.0
        return self._append(
            snap.epoch, 0, self.problem.eval_loss(snap.x_tilde), squared_norm(snap.mu)
        )

    def accumulate(self, v_sq: float, u_sq: Optional[float] = None) -> bool:
        """내부 반복의 ‖v‖², ‖u‖² 누적. u 를 측정하지 않는 실행은 u_sq=None"""
        if self.diverged:
            return False
        if not math.isfinite(v_sq):
            self.diverge(f"VR 그래디언트가 유한하지 않음 (‖v‖²={v_sq!r})")
            return False
        self._sum_v += v_sq
        if u_sq is None or self._sum_u is None:
            self._sum_u = None
        else:
            self._sum_u += u_sq
        return True

    def wants_point(self, t: int) -> bool:
        """내부 반복 t 직후의 x_{t+1} 을 기록할지 여부"""
        if self.grad_stride <= 0:
            return False
        return (t + 1) % self.grad_stride == 0 and t + 1 < self.m

    def record_point(self, epoch: int, t: int, x: ParamVector) -> bool:
        if self.diverged:
            return False
        if not np.all(np.isfinite(x)):
            self.diverge(f"epoch {epoch} iter {t + 1}: 파라미터가 유한하지 않음")
            return False
        grad = self.problem.grad_full(x)
        return self._append(epoch, t + 1, self.problem.eval_loss(x), squared_norm(grad))

    def end_epoch(self) -> None:
        if self._epoch_index is None or self.diverged:
            return
        sum_u = float("nan") if self._sum_u is None else self._sum_u
        self.trace.attach_sums(self._epoch_index, self._sum_v, sum_u)
        self._epoch_index = None

    def finish(self, x: ParamVector, epoch: int, extras: Optional[dict] = None) -> Trace:
        """x^S 에서의 마지막 레코드를 남기고 Trace 반환"""
        self.trace.final_x = np.array(x, dtype=np.float64, copy=True)
        if extras:
            self.trace.extras.update(extras)
        if self.diverged:
            return self.trace
        if not np.all(np.isfinite(x)):
            self.diverge("최종 파라미터가 유한하지 않음")
            return self.trace
        grad = self.problem.grad_full(x)
        self._append(epoch, 0, self.problem.eval_loss(x), squared_norm(grad))
        return self.trace


def enumerate_singletons(problem: FiniteSumProblem) -> List[MiniBatch]:
    """모든 단일 표본 배치 {i}, i = 0..n-1"""
    return [MiniBatch(indices=(i,)) for i in range(problem.n)]


def singleton_mean(problem: FiniteSumProblem, x: ParamVector, snap: Snapshot) -> ParamVector:
    """
    단일 표본 배치 전체에 대한 u 의 균등 평균

    u_i = g_i(x) + (μ − g_i(x̃)) 는 (g_i(x), g_i(x̃)) 에 아핀이므로, 두 항을 각각
    i = 0..n-1 순서로 평균한 뒤 combine_vr 로 한 번 결합한다.
    x̃ 쪽 평균이 μ 와 같은 순서로 합산되어 결과는 grad_full(x) 와 비트 단위로 같다.
    (u_i 를 하나씩 더하면 반올림 오차가 남는다)
    """
    batches = enumerate_singletons(problem)
    g_stale = ordered_sum((batch_mean_grad(problem, x, b) for b in batches), problem.d) / problem.n
    g_snap = ordered_sum(
        (batch_mean_grad(problem, snap.x_tilde, b) for b in batches), problem.d
    ) / problem.n
    return combine_vr(g_stale, g_snap, snap.mu)


def singleton_variance(
    problem: FiniteSumProblem, x: ParamVector, snap: Snapshot
) -> float:
    """
    단일 표본 배치 전체에 대한 u 의 경험 분산 (1/n) Σ_i ‖u_i − ū‖²

    ū 는 singleton_mean. x = x̃ 이면 모든 u_i 와 ū 가 μ 로 같아 정확히 0 이다.
    """
    rows = [ideal_vr_gradient(problem, x, snap, batch) for batch in enumerate_singletons(problem)]
    centered = np.vstack(rows) - singleton_mean(problem, x, snap)
    return float(np.mean(np.sum(centered * centered, axis=1)))
