"""
분산 메모리 AsySVRG (서버 / 워커)

- server_step  : 순수 상태 전이 (ServerState, Message) → (ServerState, outbound)
- worker_step  : 같은 배치로 (g_stale, g_snap) 계산
- SimulatedChannel : 최근 Δ+1 개 파라미터 버전 보관, 지연 주입, Δ 초과 기울기 거부
- DistributedAsyncService : 결정적 이산 사건 시뮬레이션 / 스레드 벤치마크 모드

시뮬레이션 시간 모델: 표본 그래디언트 1개 = 1 단위. GradPair 는 2b, FullGradPart 는
구간 크기만큼 걸리고, 메시지마다 latency 가 더해진다.
"""

import heapq
import itertools
import queue
import threading
from collections import deque
from dataclasses import replace
from typing import Callable, Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.domain.errors import InvalidInputError, ProtocolError
from core.domain.messages import (
    PHASE_DONE,
    PHASE_GATHER,
    PHASE_INNER,
    SERVER,
    BroadcastSnapshot,
    EventRecord,
    FullGradPart,
    GradPair,
    Message,
    ParamsForWork,
    ServerState,
)
from core.domain.models import DelayModel, MiniBatch, ParamVector, Snapshot, Trace
from core.domain.problems import FiniteSumProblem, ordered_sum
from core.domain.solver_configs import DistributedConfig
from core.ports.utility_ports import ClockPort, LoggerPort
from core.services.variance_reduction import (
    TraceRecorder,
    batch_mean_grad,
    combine_vr,
    ideal_vr_gradient,
    make_rng,
    sample_minibatch,
    squared_norm,
)

Outbound = List[Message]


# ---------------------------------------------------------------------- #
#  Server state machine                                                   #
# ---------------------------------------------------------------------- #


def start_server(
    x0: ParamVector, eta: float, m: int, S: int, n: int, num_workers: int
) -> Tuple[ServerState, Outbound]:
    """초기 상태와 첫 BroadcastSnapshot (S=0 이면 바로 done)"""
    x = np.array(x0, dtype=np.float64, copy=True)
    state = ServerState(
        x=x,
        epoch=0,
        t=0,
        eta=eta,
        m=m,
        S=S,
        n=n,
        num_workers=num_workers,
        phase=PHASE_GATHER if S > 0 else PHASE_DONE,
        parts=(None,) * num_workers,
    )
    if S == 0:
        return state, []
    return state, [BroadcastSnapshot(epoch=0, x_tilde=x)]


def _dispatch(state: ServerState, worker: int) -> ParamsForWork:
    assert state.snapshot is not None
    return ParamsForWork(
        worker=worker, epoch=state.epoch, t_issued=state.t, x=state.x, snapshot=state.snapshot
    )


def _on_full_grad_part(state: ServerState, msg: FullGradPart) -> Tuple[ServerState, Outbound]:
    if state.phase != PHASE_GATHER:
        raise ProtocolError(f"FullGradPart 를 {state.phase} 단계에서 받음")
    if not 0 <= msg.worker < state.num_workers:
        raise ProtocolError(f"알 수 없는 워커 {msg.worker}")
    if state.parts[msg.worker] is not None:
        raise ProtocolError(f"워커 {msg.worker} 의 부분합이 중복 도착")

    parts = list(state.parts)
    parts[msg.worker] = msg
    if any(p is None for p in parts):
        return replace(state, parts=tuple(parts)), []

    # 구간을 start 순으로 이어 i = 0..n-1 순서로 합산 → (1/n)
    ordered = sorted((p for p in parts if p is not None and p.count), key=lambda p: p.start)
    expected = 0
    for part in ordered:
        if part.start != expected:
            raise ProtocolError(f"부분합 구간이 이어지지 않음: start={part.start}, 기대값 {expected}")
        expected += part.count
    if expected != state.n:
        raise ProtocolError(f"부분합이 덮은 표본 수 {expected} ≠ n={state.n}")
    rows = itertools.chain.from_iterable(part.rows for part in ordered)
    mu = ordered_sum(rows, state.x.size) / state.n
    snap = Snapshot(x_tilde=state.x, mu=mu, epoch=state.epoch)
    state = replace(
        state,
        phase=PHASE_INNER,
        snapshot=snap,
        t=0,
        parts=(None,) * state.num_workers,
    )
    return state, [_dispatch(state, w) for w in range(state.num_workers)]


def _on_grad_pair(state: ServerState, msg: GradPair) -> Tuple[ServerState, Outbound]:
    if state.phase != PHASE_INNER or state.snapshot is None:
        raise ProtocolError(f"GradPair 를 {state.phase} 단계에서 받음")
    if msg.t_issued > state.t or msg.t_issued < 0:
        raise ProtocolError(f"t_issued={msg.t_issued} 가 현재 t={state.t} 보다 큼")

    v = combine_vr(msg.g_stale, msg.g_snap, state.snapshot.mu)
    x = state.x - state.eta * v
    t = state.t + 1
    staleness = state.t - msg.t_issued
    state = replace(
        state,
        x=x,
        t=t,
        last_v=v,
        applied=state.applied + 1,
        max_staleness=max(state.max_staleness, staleness),
    )
    if t < state.m:
        return state, [_dispatch(state, msg.worker)]

    # epoch 종료: x^{s+1} ← x_m^{s+1}
    epoch = state.epoch + 1
    if epoch >= state.S:
        return replace(state, epoch=epoch, phase=PHASE_DONE, snapshot=None), []
    state = replace(state, epoch=epoch, phase=PHASE_GATHER, snapshot=None)
    return state, [BroadcastSnapshot(epoch=epoch, x_tilde=x)]


def server_step(state: ServerState, msg: Message) -> Tuple[ServerState, Outbound]:
    """
    서버 상태 전이

    Raises:
        ProtocolError: 현재 단계/epoch 과 맞지 않는 메시지
    """
    if state.phase == PHASE_DONE:
        raise ProtocolError("종료된 서버에 메시지 도착")
    if isinstance(msg, (FullGradPart, GradPair)):
        if msg.epoch != state.epoch:
            raise ProtocolError(f"epoch 불일치: 메시지 {msg.epoch}, 서버 {state.epoch}")
        if isinstance(msg, FullGradPart):
            return _on_full_grad_part(state, msg)
        return _on_grad_pair(state, msg)
    raise ProtocolError(f"서버가 처리할 수 없는 메시지: {type(msg).__name__}")


# ---------------------------------------------------------------------- #
#  Worker                                                                 #
# ---------------------------------------------------------------------- #


def worker_step(
    problem: FiniteSumProblem,
    x_received: ParamVector,
    snapshot: Snapshot,
    batch: MiniBatch,
    worker: int = 0,
    epoch: Optional[int] = None,
    t_issued: int = 0,
) -> Optional[GradPair]:
    """
    같은 배치로 (1/b)Σ∇f_i(x_received), (1/b)Σ∇f_i(x̃) 계산

    epoch 이 주어졌는데 스냅샷 epoch 과 다르면 None (메시지 폐기).
    """
    if epoch is not None and epoch != snapshot.epoch:
        return None
    return GradPair(
        worker=worker,
        epoch=snapshot.epoch,
        t_issued=t_issued,
        g_stale=batch_mean_grad(problem, x_received, batch),
        g_snap=batch_mean_grad(problem, snapshot.x_tilde, batch),
        batch=batch,
    )


def partition_samples(n: int, num_workers: int) -> List[np.ndarray]:
    """표본을 워커 수만큼 연속 구간으로 분할"""
    return np.array_split(np.arange(n, dtype=np.int64), num_workers)


def full_grad_part(
    problem: FiniteSumProblem, msg: BroadcastSnapshot, worker: int, chunk: np.ndarray
) -> FullGradPart:
    """구간의 표본별 그래디언트 행 (합산은 서버가 전체 인덱스 순서로)"""
    return FullGradPart(
        worker=worker,
        epoch=msg.epoch,
        start=int(chunk[0]) if chunk.size else 0,
        rows=problem.grad_rows(msg.x_tilde, chunk),
    )


# ---------------------------------------------------------------------- #
#  Channel                                                                #
# ---------------------------------------------------------------------- #


class SimulatedChannel:
    """
    지연 주입 채널

    fixed / uniform:
        epoch 안에서 k 번째로 보내는 작업은 k 번째로 적용된다 (시뮬레이션의 작업 비용이 같음).
        그래서 x_{k−τ} (epoch 시작 이전이면 x̃) 를 읽게 하면 실현 지연이 정확히 min(τ, k) 가 된다.
        x_{k−τ} 가 아직 없으면 발행될 때까지 보류하고, 보류된 작업은 보낸 순서대로 풀린다.
    fifo_zero:
        주입 지연 없이 최신 파라미터를 보낸다 (지연은 워커 동시성에서만 생김).

    Contract:
        적용되는 모든 기울기의 실현 지연 t_apply − t_issued 는 Δ 이하.
        초과하면 admit 이 거부하고 호출자는 최신 파라미터를 다시 보낸다.
    """

    def __init__(self, delay: DelayModel) -> None:
        self.delta = delay.delta
        self._injects = delay.kind != "fifo_zero"
        self._draw: Callable[[], int] = delay.sampler()
        self._versions: Deque[Tuple[int, ParamVector]] = deque(maxlen=delay.delta + 1)
        self._slot = 0
        self._waiting: Deque[Tuple[int, ParamsForWork]] = deque()
        self._ready: List[ParamsForWork] = []

    def reset_epoch(self, x_tilde: ParamVector) -> None:
        """새 epoch: 버전 기록과 보류 작업을 비운다"""
        self._versions.clear()
        self._versions.append((0, x_tilde))
        self._slot = 0
        self._waiting.clear()
        self._ready.clear()

    def publish(self, t: int, x: ParamVector) -> None:
        self._versions.append((t, x))
        self._release()

    def dispatch(self, msg: ParamsForWork) -> None:
        """작업을 채널에 넣는다 (전달 가능한 것은 drain 으로 꺼냄)"""
        if not self._injects:
            self._ready.append(msg)
            return
        tau = self._draw()
        self._waiting.append((max(self._slot - tau, 0), msg))
        self._slot += 1
        self._release()

    def drain(self) -> List[ParamsForWork]:
        """전달 가능한 작업 (보낸 순서)"""
        ready, self._ready = self._ready, []
        return ready

    def _release(self) -> None:
        latest = self._versions[-1][0]
        while self._waiting and self._waiting[0][0] <= latest:
            target, msg = self._waiting.popleft()
            self._ready.append(replace(msg, x=self._version(target), t_issued=target))

    def _version(self, target: int) -> ParamVector:
        for t, x in self._versions:
            if t == target:
                return x
        raise ProtocolError(f"버전 x_{target} 가 채널에 남아 있지 않음")

    def admit(self, msg: GradPair, t_apply: int) -> bool:
        return t_apply - msg.t_issued <= self.delta


class SimulatedTime(ClockPort):
    """이산 사건 시뮬레이션 시계 (시뮬레이션 시간 단위)"""

    kind = "simulated"

    def __init__(self) -> None:
        self._now = 0

    def start(self) -> None:
        self._now = 0

    def advance(self, units: int) -> None:
        self._now += units

    def move_to(self, time: int) -> None:
        self._now = max(self._now, time)

    def elapsed_ns(self) -> int:
        return self._now


# ---------------------------------------------------------------------- #
#  Executor                                                               #
# ---------------------------------------------------------------------- #


class DistributedAsyncService:
    """
    분산 메모리 AsySVRG 실행 서비스

    책임:
        - 서버 상태 기계와 워커를 메시지로 연결
        - 서버 측 일관된 x_t 에서 u_t 를 함께 계산해 Σ‖u‖² 기록
        - 실현 지연, 거부/폐기 메시지 수를 Trace.extras 로 보고
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

    def run_distributed(
        self,
        problem: FiniteSumProblem,
        cfg: DistributedConfig,
        event_log: Optional[List[EventRecord]] = None,
    ) -> Trace:
        if cfg.mode == "threaded":
            return self._run_threaded(problem, cfg)
        return self._run_simulated(problem, cfg, event_log)

    def _initial(self, problem: FiniteSumProblem, cfg: DistributedConfig) -> ParamVector:
        if cfg.warm_start_x is None:
            return problem.initial_point(cfg.seed)
        return np.array(problem.check_x(cfg.warm_start_x), dtype=np.float64, copy=True)

    def _on_grad_pair(
        self,
        problem: FiniteSumProblem,
        state: ServerState,
        msg: GradPair,
        recorder: TraceRecorder,
        channel: SimulatedChannel,
    ) -> Tuple[ServerState, Outbound]:
        """GradPair 적용 + u_t 측정 + Trace 기록 (호출 전 admit 통과)"""
        assert state.snapshot is not None
        u = ideal_vr_gradient(problem, state.x, state.snapshot, msg.batch)
        t_before = state.t
        new_state, outbound = server_step(state, msg)
        assert new_state.last_v is not None
        if not recorder.accumulate(squared_norm(new_state.last_v), squared_norm(u)):
            return new_state, []
        if not np.all(np.isfinite(new_state.x)):
            recorder.diverge(f"epoch {state.epoch} iter {t_before + 1}: 파라미터가 유한하지 않음")
            return new_state, []
        if new_state.phase == PHASE_INNER and new_state.epoch == state.epoch:
            channel.publish(new_state.t, new_state.x)
            if recorder.wants_point(t_before):
                recorder.record_point(state.epoch, t_before, new_state.x)
        else:
            recorder.end_epoch()
            self.logger.info(
                f"[Distributed] epoch {state.epoch + 1}/{state.S} "
                f"종료 loss={problem.eval_loss(new_state.x):.6g} max τ={new_state.max_staleness}"
            )
        return new_state, outbound

    def _run_simulated(
        self,
        problem: FiniteSumProblem,
        cfg: DistributedConfig,
        event_log: Optional[List[EventRecord]],
    ) -> Trace:
        clock = SimulatedTime()
        recorder = TraceRecorder(
            problem,
            clock,
            divergence_threshold=self.divergence_threshold,
            grad_stride=cfg.grad_stride,
            m=cfg.m,
        )
        channel = SimulatedChannel(cfg.delay)
        chunks = partition_samples(problem.n, cfg.num_workers)
        rngs = [make_rng(cfg.seed, w) for w in range(cfg.num_workers)]
        busy_until = [0] * cfg.num_workers
        heap: List[Tuple[int, int, int, Message]] = []
        seq = itertools.count()
        counters = {"rejected": 0, "dropped": 0}

        def log(time: int, kind: str, worker: int, t_issued: int) -> None:
            if event_log is not None:
                event_log.append(EventRecord(time, kind, worker, t_issued))

        def route(time: int, outbound: Sequence[Message]) -> None:
            for out in outbound:
                if isinstance(out, BroadcastSnapshot):
                    channel.reset_epoch(out.x_tilde)
                    for w in range(cfg.num_workers):
                        heapq.heappush(heap, (time + cfg.latency, next(seq), w, out))
                    log(time, "broadcast", -1, 0)
                elif isinstance(out, ParamsForWork):
                    channel.dispatch(out)
            # 이번 적용으로 풀린 보류 작업 포함, 보낸 순서대로
            for work in channel.drain():
                heapq.heappush(heap, (time + cfg.latency, next(seq), work.worker, work))
                log(time, "dispatch", work.worker, work.t_issued)

        self.logger.info(
            f"[Distributed] 시뮬레이션 워커 {cfg.num_workers}개, 지연 {cfg.delay.kind}(Δ={cfg.delay.delta}), "
            f"S={cfg.S}, m={cfg.m}, b={cfg.b}"
        )
        clock.start()
        state, outbound = start_server(
            self._initial(problem, cfg), cfg.eta, cfg.m, cfg.S, problem.n, cfg.num_workers
        )
        route(0, outbound)

        while heap and state.phase != PHASE_DONE and not recorder.diverged:
            time, _, target, msg = heapq.heappop(heap)
            clock.move_to(time)

            if target != SERVER:
                start = max(time, busy_until[target])
                if isinstance(msg, BroadcastSnapshot):
                    reply: Optional[Message] = full_grad_part(problem, msg, target, chunks[target])
                    cost = int(chunks[target].size)
                else:
                    assert isinstance(msg, ParamsForWork)
                    batch = sample_minibatch(rngs[target], problem.n, cfg.b)
                    reply = worker_step(
                        problem, msg.x, msg.snapshot, batch, target, msg.epoch, msg.t_issued
                    )
                    cost = 2 * batch.b
                busy_until[target] = start + cost
                if reply is None:
                    counters["dropped"] += 1
                    continue
                heapq.heappush(heap, (start + cost + cfg.latency, next(seq), SERVER, reply))
                continue

            assert isinstance(msg, (FullGradPart, GradPair))
            if msg.epoch != state.epoch:
                # 이전 epoch 에 발급된 작업: 서버 도달 전에 폐기
                counters["dropped"] += 1
                log(time, "drop", msg.worker, getattr(msg, "t_issued", 0))
                continue

            if isinstance(msg, FullGradPart):
                state, outbound = server_step(state, msg)
                log(time, "fullgrad", msg.worker, 0)
                if state.phase == PHASE_INNER:
                    assert state.snapshot is not None
                    if not recorder.begin_epoch(state.snapshot):
                        break
                route(time, outbound)
                continue

            if not channel.admit(msg, state.t):
                counters["rejected"] += 1
                log(time, "reject", msg.worker, msg.t_issued)
                route(time, [_dispatch(state, msg.worker)])
                continue

            log(time, "apply", msg.worker, msg.t_issued)
            state, outbound = self._on_grad_pair(problem, state, msg, recorder, channel)
            route(time, outbound)

        extras = {
            "max_staleness": float(state.max_staleness),
            "rejected": float(counters["rejected"]),
            "dropped": float(counters["dropped"]),
            "simulated_time": float(clock.elapsed_ns()),
            "num_workers": float(cfg.num_workers),
        }
        return self._finish(recorder, state, cfg.S, extras)

    def _run_threaded(self, problem: FiniteSumProblem, cfg: DistributedConfig) -> Trace:
        """
        실제 스레드 + 큐 모드 (벤치마크 전용, 인터리빙은 비결정적)

        지연은 동시성에서만 생기며 Δ 초과 기울기는 같은 채널 규칙으로 거부된다.
        """
        recorder = TraceRecorder(
            problem,
            self.clock,
            divergence_threshold=self.divergence_threshold,
            grad_stride=cfg.grad_stride,
            m=cfg.m,
        )
        channel = SimulatedChannel(DelayModel(kind="fifo_zero", delta=cfg.delay.delta))
        chunks = partition_samples(problem.n, cfg.num_workers)
        server_inbox: "queue.Queue[Message]" = queue.Queue()
        inboxes: List["queue.Queue[Optional[Message]]"] = [queue.Queue() for _ in range(cfg.num_workers)]
        counters: Dict[str, int] = {"rejected": 0, "dropped": 0}

        def worker_loop(w: int) -> None:
            rng = make_rng(cfg.seed, w)
            while True:
                msg = inboxes[w].get()
                if msg is None:
                    return
                if isinstance(msg, BroadcastSnapshot):
                    server_inbox.put(full_grad_part(problem, msg, w, chunks[w]))
                elif isinstance(msg, ParamsForWork):
                    batch = sample_minibatch(rng, problem.n, cfg.b)
                    reply = worker_step(problem, msg.x, msg.snapshot, batch, w, msg.epoch, msg.t_issued)
                    if reply is not None:
                        server_inbox.put(reply)

        def route(outbound: Sequence[Message]) -> None:
            for out in outbound:
                if isinstance(out, BroadcastSnapshot):
                    channel.reset_epoch(out.x_tilde)
                    for box in inboxes:
                        box.put(out)
                elif isinstance(out, ParamsForWork):
                    inboxes[out.worker].put(out)

        threads = [
            threading.Thread(target=worker_loop, args=(w,), daemon=True)
            for w in range(cfg.num_workers)
        ]
        for th in threads:
            th.start()

        self.logger.info(f"[Distributed] 스레드 모드 워커 {cfg.num_workers}개, S={cfg.S}, m={cfg.m}")
        self.clock.start()
        state, outbound = start_server(
            self._initial(problem, cfg), cfg.eta, cfg.m, cfg.S, problem.n, cfg.num_workers
        )
        try:
            route(outbound)
            while state.phase != PHASE_DONE and not recorder.diverged:
                msg = server_inbox.get()
                assert isinstance(msg, (FullGradPart, GradPair))
                if msg.epoch != state.epoch:
                    counters["dropped"] += 1
                    continue
                if isinstance(msg, FullGradPart):
                    self.clock.advance(msg.count)
                    state, outbound = server_step(state, msg)
                    if state.phase == PHASE_INNER:
                        assert state.snapshot is not None
                        if not recorder.begin_epoch(state.snapshot):
                            break
                    route(outbound)
                    continue
                if not channel.admit(msg, state.t):
                    counters["rejected"] += 1
                    inboxes[msg.worker].put(_dispatch(state, msg.worker))
                    continue
                self.clock.advance(2 * msg.batch.b)
                state, outbound = self._on_grad_pair(problem, state, msg, recorder, channel)
                route(outbound)
        finally:
            for box in inboxes:
                box.put(None)
            for th in threads:
                th.join()

        extras = {
            "max_staleness": float(state.max_staleness),
            "rejected": float(counters["rejected"]),
            "dropped": float(counters["dropped"]),
            "num_workers": float(cfg.num_workers),
        }
        return self._finish(recorder, state, cfg.S, extras)

    def _finish(
        self, recorder: TraceRecorder, state: ServerState, S: int, extras: Dict[str, float]
    ) -> Trace:
        trace = recorder.finish(state.x, S, extras)
        if trace.diverged:
            self.logger.warning(f"⚠️  분산 AsySVRG 발산: {trace.diagnostic}")
        return trace


def check_staleness_bound(trace: Trace, delta: int) -> bool:
    """실현 최대 지연이 Δ 이하인지"""
    if "max_staleness" not in trace.extras:
        raise InvalidInputError("Trace 에 max_staleness 기록이 없음")
    return trace.extras["max_staleness"] <= delta
