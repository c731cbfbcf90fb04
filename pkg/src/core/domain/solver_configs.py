# src/core/domain/solver_configs.py
"""
실행기별 설정 값 객체

grad_stride:
    0 이면 epoch 스냅샷 시점에만 ‖∇f‖² 를 기록 (μ 를 재사용하므로 추가 비용 없음)
    k 이면 내부 반복 k 회마다 전체 그래디언트를 계산해 추가로 기록 (O(nd))
"""

from dataclasses import dataclass
from typing import Optional

from core.domain.errors import InvalidInputError
from core.domain.models import DelayModel, ParamVector, SgdSchedule, StalenessSchedule


def _check_common(S: int, m: int, b: int, grad_stride: int) -> None:
    if S < 0:
        raise InvalidInputError(f"epoch 수는 0 이상이어야 함: {S}")
    if m < 1:
        raise InvalidInputError(f"m 은 1 이상이어야 함: {m}")
    if b < 1:
        raise InvalidInputError(f"미니배치 크기 b 는 1 이상이어야 함: {b}")
    if grad_stride < 0:
        raise InvalidInputError(f"grad_stride 는 0 이상이어야 함: {grad_stride}")


def _check_eta(eta: float) -> None:
    if not eta > 0:
        raise InvalidInputError(f"학습률 eta 는 양수여야 함: {eta}")


@dataclass(frozen=True)
class SgdConfig:
    epochs: int
    iters_per_epoch: int
    b: int
    sched: SgdSchedule
    seed: int = 0
    x0: Optional[ParamVector] = None
    grad_stride: int = 0

    def __post_init__(self) -> None:
        _check_common(self.epochs, self.iters_per_epoch, self.b, self.grad_stride)


@dataclass(frozen=True)
class SvrgConfig:
    """직렬 SVRG. block_size=None 이면 전체 벡터 갱신"""

    S: int
    m: int
    b: int
    eta: float
    seed: int = 0
    warm_start_x: Optional[ParamVector] = None
    block_size: Optional[int] = None
    grad_stride: int = 0

    def __post_init__(self) -> None:
        _check_common(self.S, self.m, self.b, self.grad_stride)
        _check_eta(self.eta)
        if self.block_size is not None and self.block_size < 1:
            raise InvalidInputError(f"block_size 는 1 이상이어야 함: {self.block_size}")


@dataclass(frozen=True)
class SharedConfig:
    """
    공유 메모리 AsySVRG

    mode:
        live   - 실제 스레드, 비일관 읽기 (인터리빙은 하드웨어 의존)
        replay - StalenessSchedule 기반 단일 스레드 결정적 재생
    """

    S: int
    m: int
    b: int
    eta: float
    block_size: Optional[int] = None
    num_workers: int = 1
    seed: int = 0
    mode: str = "live"
    schedule: Optional[StalenessSchedule] = None
    warm_start_x: Optional[ParamVector] = None
    grad_stride: int = 0

    def __post_init__(self) -> None:
        _check_common(self.S, self.m, self.b, self.grad_stride)
        _check_eta(self.eta)
        if self.mode not in ("live", "replay"):
            raise InvalidInputError(f"알 수 없는 mode: {self.mode}")
        if self.num_workers < 1:
            raise InvalidInputError(f"num_workers 는 1 이상이어야 함: {self.num_workers}")
        if self.block_size is not None and self.block_size < 1:
            raise InvalidInputError(f"block_size 는 1 이상이어야 함: {self.block_size}")


@dataclass(frozen=True)
class DistributedConfig:
    """
    분산 메모리 AsySVRG

    mode:
        simulated - 결정적 이산 사건 시뮬레이션 (정확성 검증용)
        threaded  - 실제 스레드 + 큐 (벤치마크 전용)
    latency: 메시지 전달 지연 (시뮬레이션 시간 단위)
    """

    S: int
    m: int
    b: int
    eta: float
    num_workers: int = 1
    delay: DelayModel = DelayModel(kind="fifo_zero", delta=0)
    seed: int = 0
    mode: str = "simulated"
    latency: int = 0
    warm_start_x: Optional[ParamVector] = None
    grad_stride: int = 0

    def __post_init__(self) -> None:
        _check_common(self.S, self.m, self.b, self.grad_stride)
        _check_eta(self.eta)
        if self.mode not in ("simulated", "threaded"):
            raise InvalidInputError(f"알 수 없는 mode: {self.mode}")
        if self.num_workers < 1:
            raise InvalidInputError(f"num_workers 는 1 이상이어야 함: {self.num_workers}")
        if self.latency < 0:
            raise InvalidInputError(f"latency 는 0 이상이어야 함: {self.latency}")
