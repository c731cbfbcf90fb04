# src/core/domain/messages.py
"""
분산 AsySVRG 서버/워커 메시지와 서버 상태
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from core.domain.models import MiniBatch, ParamVector, Snapshot

SERVER = -1

PHASE_GATHER = "gather"
PHASE_INNER = "inner"
PHASE_DONE = "done"


@dataclass(frozen=True)
class BroadcastSnapshot:
    """epoch 시작: x̃ 를 모든 워커에 전파 (전체 그래디언트 부분합 요청)"""

    epoch: int
    x_tilde: ParamVector


@dataclass(frozen=True)
class FullGradPart:
    """
    워커가 맡은 연속 구간 [start, start+count) 의 표본별 ∇f_i(x̃) 행

    서버는 모든 구간의 행을 인덱스 순서로 이어 합산한다 (grad_full 과 같은 순서).
    """

    worker: int
    epoch: int
    start: int
    rows: npt.NDArray[np.float64]

    @property
    def count(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class ParamsForWork:
    """워커에게 보내는 (x_{t_issued}, 스냅샷)"""

    worker: int
    epoch: int
    t_issued: int
    x: ParamVector
    snapshot: Snapshot


@dataclass(frozen=True)
class GradPair:
    """같은 배치에서 계산한 (1/b)Σ∇f_i(x_{t−τ}) 와 (1/b)Σ∇f_i(x̃)"""

    worker: int
    epoch: int
    t_issued: int
    g_stale: ParamVector
    g_snap: ParamVector
    batch: MiniBatch


Message = Union[BroadcastSnapshot, FullGradPart, ParamsForWork, GradPair]


@dataclass(frozen=True)
class ServerState:
    """
    서버 상태 기계

    phase:
        gather - 전체 그래디언트 부분합 수집 중 (snapshot 은 None)
        inner  - 내부 반복 t (0 ≤ t < m)
        done   - S epoch 완료
    """

    x: ParamVector
    epoch: int
    t: int
    eta: float
    m: int
    S: int
    n: int
    num_workers: int
    phase: str = PHASE_GATHER
    snapshot: Optional[Snapshot] = None
    parts: Tuple[Optional[FullGradPart], ...] = field(default_factory=tuple)
    max_staleness: int = 0
    applied: int = 0
    last_v: Optional[ParamVector] = None


@dataclass(frozen=True)
class EventRecord:
    """이벤트 로그 한 줄: `time kind worker t_issued`"""

    time: int
    kind: str
    worker: int
    t_issued: int

    def as_line(self) -> str:
        return f"{self.time} {self.kind} {self.worker} {self.t_issued}"
