"""
공유 메모리 AsySVRG

live   : 스레드 워커가 전역 잠금 없이 좌표별로 읽고, 좌표별 원자적 갱신을 적용
replay : StalenessSchedule 의 J(t) 로 비일관 읽기 x̂ 를 재구성하는 단일 스레드 재생
"""

import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.domain.errors import InvalidInputError
from core.domain.models import (
    MiniBatch,
    ParamVector,
    Snapshot,
    StaleReads,
    StalenessSchedule,
    Trace,
)
from core.domain.problems import FiniteSumProblem
from core.domain.solver_configs import SharedConfig
from core.ports.utility_ports import ClockPort, LoggerPort
from core.services.serial_solvers import is_finite
from core.services.staleness import validate_schedule
from core.services.variance_reduction import (
    TraceRecorder,
    ideal_vr_gradient,
    make_rng,
    sample_block,
    sample_minibatch,
    squared_norm,
    take_snapshot,
    vr_gradient,
)

DEFAULT_STRIPES = 64


class SharedParams:
    """
    좌표별 원자성만 보장하는 공유 파라미터 벡터

    좌표 k 는 잠금 줄무늬 k % S 에 속한다. 읽기는 잠금 없이 좌표 값을 복사하므로
    여러 워커의 갱신이 섞인 벡터가 관찰될 수 있다 (전체 벡터 일관성 없음).
    float64 단일 좌표 쓰기는 찢어지지 않는다.
    """

    def __init__(self, x0: ParamVector, num_stripes: int = DEFAULT_STRIPES) -> None:
        self._values = np.array(x0, dtype=np.float64, copy=True)
        self._stripes = max(1, min(num_stripes, self._values.size))
        self._locks = [threading.Lock() for _ in range(self._stripes)]

    @property
    def d(self) -> int:
        return int(self._values.size)

    def read(self) -> ParamVector:
        return self._values.copy()

    def load(self, x: ParamVector) -> None:
        """정지 상태(epoch 경계)에서만 호출"""
        self._values[:] = x

    def apply(self, coords: Optional[Sequence[int] | np.ndarray], v: ParamVector, eta: float) -> None:
        idx = self._validate(coords)
        stripe_of = idx % self._stripes
        for stripe in np.unique(stripe_of):
            sel = idx[stripe_of == stripe]
            with self._locks[int(stripe)]:
                self._values[sel] = self._values[sel] - eta * v[sel]

    def _validate(self, coords: Optional[Sequence[int] | np.ndarray]) -> np.ndarray:
        if coords is None:
            return np.arange(self.d)
        idx = np.asarray(coords, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= self.d):
            raise InvalidInputError(f"좌표가 [0, {self.d}) 범위를 벗어남")
        if np.unique(idx).size != idx.size:
            raise InvalidInputError("중복된 좌표")
        return idx


def apply_coord_update(
    x: SharedParams, coords: Optional[Sequence[int] | np.ndarray], v: ParamVector, eta: float
) -> None:
    """coords 의 각 좌표 k 에 대해 x_k ← x_k − η v_k (좌표별 원자적), 나머지는 그대로"""
    if np.shape(v) != (x.d,):
        raise InvalidInputError(f"v 차원 불일치: {np.shape(v)} (기대값 ({x.d},))")
    x.apply(coords, v, eta)


class IterationCounter:
    """epoch 당 정확히 m 개의 내부 반복만 허용하는 공유 카운터"""

    def __init__(self, m: int) -> None:
        self._m = m
        self._next = 0
        self._lock = threading.Lock()

    def claim(self) -> Optional[int]:
        with self._lock:
            if self._next >= self._m:
                return None
            t = self._next
            self._next += 1
            return t

    @property
    def issued(self) -> int:
        return self._next


class _History:
    """재생 모드의 최근 Δ 개 갱신 (coords, x_{j+1} − x_j)"""

    def __init__(self, delta: int) -> None:
        self._entries: Deque[Tuple[int, Optional[np.ndarray], ParamVector]] = deque(
            maxlen=max(delta, 1)
        )

    def clear(self) -> None:
        self._entries.clear()

    def push(self, j: int, coords: Optional[np.ndarray], diff: ParamVector) -> None:
        self._entries.append((j, coords, diff))

    def materialize(self, x: ParamVector, missed: Sequence[int]) -> ParamVector:
        """x̂ = x − Σ_{j∈J} (x_{j+1} − x_j)"""
        if not missed:
            return x
        by_j: Dict[int, Tuple[Optional[np.ndarray], ParamVector]] = {
            j: (coords, diff) for j, coords, diff in self._entries
        }
        x_hat = x.copy()
        for j in missed:
            if j not in by_j:
                # validate_schedule 통과 후에는 도달하지 않음
                raise InvalidInputError(f"갱신 {j} 가 최근 Δ 기록에 없음")
            coords, diff = by_j[j]
            if coords is None:
                x_hat -= diff
            else:
                x_hat[coords] -= diff
        return x_hat


class SharedAsyncService:
    """
    공유 메모리 AsySVRG 실행 서비스

    책임:
        - live 모드: ThreadPoolExecutor 워커, 공유 카운터로 epoch 당 m 회 갱신
        - replay 모드: 결정적 재생, u_t 를 일관된 x_t 에서 함께 계산
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

    def _initial(self, problem: FiniteSumProblem, cfg: SharedConfig) -> ParamVector:
        if cfg.warm_start_x is None:
            return problem.initial_point(cfg.seed)
        return np.array(problem.check_x(cfg.warm_start_x), dtype=np.float64, copy=True)

    def _recorder(self, problem: FiniteSumProblem, cfg: SharedConfig) -> TraceRecorder:
        return TraceRecorder(
            problem,
            self.clock,
            divergence_threshold=self.divergence_threshold,
            grad_stride=cfg.grad_stride,
            m=cfg.m,
        )

    def run_shared_async(self, problem: FiniteSumProblem, cfg: SharedConfig) -> Trace:
        if cfg.block_size is not None and cfg.block_size > problem.d:
            raise InvalidInputError(f"block_size({cfg.block_size}) 가 d({problem.d}) 보다 큼")
        if cfg.mode == "replay":
            schedule = cfg.schedule or StalenessSchedule(delta=0)
            return self.replay_with_schedule(problem, cfg, schedule)
        return self._run_live(problem, cfg)

    # ------------------------------------------------------------------ #
    #  live                                                                #
    # ------------------------------------------------------------------ #

    def _run_live(self, problem: FiniteSumProblem, cfg: SharedConfig) -> Trace:
        shared = SharedParams(self._initial(problem, cfg))
        rngs = [make_rng(cfg.seed, w) for w in range(cfg.num_workers)]
        recorder = self._recorder(problem, cfg)
        abort = threading.Event()
        self.logger.info(f"[Shared-live] 워커 {cfg.num_workers}개, S={cfg.S}, m={cfg.m}, b={cfg.b}")
        self.clock.start()

        with ThreadPoolExecutor(max_workers=cfg.num_workers) as pool:
            for s in range(cfg.S):
                x_now = shared.read()
                if not is_finite(x_now):
                    recorder.diverge(f"epoch {s}: 파라미터가 유한하지 않음")
                    break
                snap = take_snapshot(problem, x_now, s)
                self.clock.advance(problem.n)
                if not recorder.begin_epoch(snap):
                    break

                counter = IterationCounter(cfg.m)
                futures = [
                    pool.submit(
                        self._live_worker, problem, shared, snap, counter, rngs[w], cfg, recorder, abort
                    )
                    for w in range(cfg.num_workers)
                ]
                # epoch 경계: 모든 워커 정지 후 단일 작성자로 집계
                results: List[Tuple[int, float, Optional[ParamVector]]] = []
                for future in futures:
                    results.extend(future.result())
                results.sort(key=lambda item: item[0])

                for t, v_sq, point in results:
                    if not recorder.accumulate(v_sq):
                        break
                    if point is not None and not recorder.record_point(s, t, point):
                        break
                if recorder.diverged:
                    break
                recorder.end_epoch()
                self.logger.info(
                    f"[Shared-live] epoch {s + 1}/{cfg.S} 종료 loss={problem.eval_loss(shared.read()):.6g}"
                )

        return self._finish(recorder, shared.read(), cfg.S, {"num_workers": float(cfg.num_workers)})

    def _live_worker(
        self,
        problem: FiniteSumProblem,
        shared: SharedParams,
        snap: Snapshot,
        counter: IterationCounter,
        rng: np.random.Generator,
        cfg: SharedConfig,
        recorder: TraceRecorder,
        abort: threading.Event,
    ) -> List[Tuple[int, float, Optional[ParamVector]]]:
        local: List[Tuple[int, float, Optional[ParamVector]]] = []
        while not abort.is_set():
            t = counter.claim()
            if t is None:
                break
            x_hat = shared.read()
            batch = sample_minibatch(rng, problem.n, cfg.b)
            # 배치 전체의 그래디언트를 계산한 뒤에 좌표를 쓴다
            v = vr_gradient(problem, StaleReads.uniform(x_hat, batch.b), snap, batch)
            self.clock.advance(2 * batch.b)
            v_sq = squared_norm(v)
            if not np.isfinite(v_sq):
                abort.set()
                local.append((t, v_sq, None))
                break
            coords = sample_block(rng, problem.d, cfg.block_size)
            apply_coord_update(shared, coords, v, cfg.eta)
            point = shared.read() if recorder.wants_point(t) else None
            local.append((t, v_sq, point))
        return local

    # ------------------------------------------------------------------ #
    #  replay                                                              #
    # ------------------------------------------------------------------ #

    def replay_with_schedule(
        self, problem: FiniteSumProblem, cfg: SharedConfig, sched: StalenessSchedule
    ) -> Trace:
        """
        결정적 단일 스레드 재생

        반복 t (전역 번호 s·m + t_local) 의 읽기는 x̂ = x_t − Σ_{j∈J(t)} (x_{j+1} − x_j).
        같은 난수 스트림 (seed, 0) 으로 배치 → 블록 순으로 추출하므로,
        J(t) 가 모두 비면 직렬 블록 좌표 SVRG 와 비트 단위로 같다.
        """
        validate_schedule(sched, cfg.S, cfg.m, min(cfg.b, problem.n))
        x = self._initial(problem, cfg)
        rng = make_rng(cfg.seed, 0)
        recorder = self._recorder(problem, cfg)
        history = _History(sched.delta)
        max_tau = 0
        self.logger.info(
            f"[Shared-replay] Δ={sched.delta}, S={cfg.S}, m={cfg.m}, b={cfg.b}, "
            f"지연 반복 {len(sched.iteration_sets) + len(sched.sample_sets)}개"
        )
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
            history.clear()

            for t_local in range(cfg.m):
                t = s * cfg.m + t_local
                batch = sample_minibatch(rng, problem.n, cfg.b)
                stale = self._stale_reads(x, t, batch, sched, history)
                max_tau = max(max_tau, max(stale.tau))

                v = vr_gradient(problem, stale, snap, batch)
                if all(vec is x for vec in stale.vectors):
                    u = v
                else:
                    u = ideal_vr_gradient(problem, x, snap, batch)
                self.clock.advance(2 * batch.b)
                if not recorder.accumulate(squared_norm(v), squared_norm(u)):
                    break

                coords = sample_block(rng, problem.d, cfg.block_size)
                if coords is None:
                    x_next = x - cfg.eta * v
                    history.push(t, None, x_next - x)
                else:
                    x_next = x.copy()
                    x_next[coords] = x[coords] - cfg.eta * v[coords]
                    history.push(t, coords, x_next[coords] - x[coords])
                x = x_next
                if recorder.wants_point(t_local) and not recorder.record_point(s, t_local, x):
                    break
            if recorder.diverged:
                break
            recorder.end_epoch()
            self.logger.info(
                f"[Shared-replay] epoch {s + 1}/{cfg.S} 종료 loss={problem.eval_loss(x):.6g}"
            )

        return self._finish(recorder, x, cfg.S, {"max_staleness": float(max_tau)})

    @staticmethod
    def _stale_reads(
        x: ParamVector,
        t: int,
        batch: MiniBatch,
        sched: StalenessSchedule,
        history: _History,
    ) -> StaleReads:
        if sched.has_sample_sets_for(t):
            vectors = []
            taus = []
            for k in range(batch.b):
                missed = sched.missed(t, k)
                vectors.append(history.materialize(x, missed))
                taus.append(t - min(missed) if missed else 0)
            return StaleReads(vectors=tuple(vectors), tau=tuple(taus))
        missed = sched.missed(t)
        tau = t - min(missed) if missed else 0
        return StaleReads.uniform(history.materialize(x, missed), batch.b, tau=tau)

    def _finish(
        self, recorder: TraceRecorder, x: ParamVector, S: int, extras: Dict[str, float]
    ) -> Trace:
        trace = recorder.finish(x, S, extras)
        if trace.diverged:
            self.logger.warning(f"⚠️  공유 메모리 AsySVRG 발산: {trace.diagnostic}")
        return trace
