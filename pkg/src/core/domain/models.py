# src/core/domain/models.py
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from core.domain.errors import InvalidInputError

# d차원 실수 벡터 x ∈ R^d
ParamVector = npt.NDArray[np.float64]

TRACE_COLUMNS = [
    "epoch",
    "iter",
    "loss",
    "grad_norm_sq",
    "wall_ns",
    "sum_v_sq",
    "sum_u_sq",
]


@dataclass(frozen=True)
class Dataset:
    """
    유한합 문제의 표본 집합

    분류 문제면 labels는 [0, num_classes) 정수, 회귀(least_squares)면
    실수 타깃이고 num_classes는 None.
    """

    features: npt.NDArray[np.float64]  # n×p
    labels: npt.NDArray  # n
    num_classes: Optional[int] = None

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise InvalidInputError(f"features는 2차원이어야 함: {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise InvalidInputError(
                f"labels 개수 불일치: {self.labels.shape} vs n={self.features.shape[0]}"
            )
        if not np.all(np.isfinite(self.features)):
            raise InvalidInputError("features에 유한하지 않은 값이 있음")
        if self.num_classes is not None and self.labels.size:
            if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
                raise InvalidInputError(
                    f"레이블이 [0, {self.num_classes}) 범위를 벗어남"
                )

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def p(self) -> int:
        return int(self.features.shape[1])

    def head(self, limit: int) -> "Dataset":
        """앞에서부터 최대 limit개 표본"""
        return replace(
            self, features=self.features[:limit], labels=self.labels[:limit]
        )


@dataclass(frozen=True)
class SyntheticSpec:
    """
    합성 데이터 생성 명세

    task:
        classification - 무작위 선형 분류기의 argmax 레이블 (+ 점수 노이즈)
        regression     - y = A w* + noise (least_squares 용)
    """

    n: int
    p: int
    num_classes: int = 2
    noise: float = 0.0
    seed: int = 0
    task: str = "classification"
    num_test: int = 0

    def __post_init__(self) -> None:
        if self.n < 1 or self.p < 1:
            raise InvalidInputError(f"n, p 는 1 이상이어야 함: n={self.n}, p={self.p}")
        if self.task not in ("classification", "regression"):
            raise InvalidInputError(f"알 수 없는 task: {self.task}")
        if self.task == "classification" and self.num_classes < 2:
            raise InvalidInputError(f"분류 클래스 수는 2 이상이어야 함: {self.num_classes}")
        if self.noise < 0 or self.num_test < 0:
            raise InvalidInputError("noise, num_test 는 0 이상이어야 함")


@dataclass(frozen=True)
class DatasetBundle:
    """학습/테스트 데이터 묶음"""

    train: Dataset
    test: Optional[Dataset] = None


@dataclass(frozen=True)
class Snapshot:
    """epoch 기준점 (x̃^s, μ = ∇f(x̃^s))"""

    x_tilde: ParamVector
    mu: ParamVector
    epoch: int


@dataclass(frozen=True)
class MiniBatch:
    """미니배치 I_t"""

    indices: Tuple[int, ...]

    @property
    def b(self) -> int:
        return len(self.indices)

    def as_array(self) -> npt.NDArray[np.int64]:
        return np.asarray(self.indices, dtype=np.int64)


@dataclass(frozen=True)
class StaleReads:
    """
    배치 원소별 stale 파라미터 x̂_{t,i_t} (공유 메모리) 또는 x_{t-τ_i} (분산)

    vectors[k] 는 batch.indices[k] 의 그래디언트를 계산할 때 사용한 파라미터.
    """

    vectors: Tuple[ParamVector, ...]
    tau: Tuple[int, ...]

    @classmethod
    def uniform(cls, x: ParamVector, b: int, tau: int = 0) -> "StaleReads":
        """배치 전체가 같은 읽기 스냅샷을 공유하는 경우"""
        return cls(vectors=(x,) * b, tau=(tau,) * b)

    def is_shared(self) -> bool:
        first = self.vectors[0]
        return all(v is first for v in self.vectors)


@dataclass(frozen=True)
class SgdSchedule:
    """다항 감쇠 학습률 η_s = α/(1+s)^β"""

    alpha: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise InvalidInputError(f"alpha는 양수여야 함: {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidInputError(f"beta는 [0, 1] 범위여야 함: {self.beta}")


@dataclass(frozen=True)
class TraceRecord:
    """Trace 한 행 (CSV 스키마와 동일한 순서)"""

    epoch: int
    iter: int
    loss: float
    grad_norm_sq: float
    wall_ns: int
    sum_v_sq: float = float("nan")
    sum_u_sq: float = float("nan")

    def as_row(self) -> Dict[str, float]:
        return {column: getattr(self, column) for column in TRACE_COLUMNS}


@dataclass
class Trace:
    """
    실행 기록 (단일 작성자)

    레코드 배치:
        - epoch s 시작(스냅샷) 레코드: iter=0, loss=f(x̃^s), grad_norm_sq=‖μ‖²
        - stride 레코드: iter=t+1 (1..m-1)
        - 마지막 레코드: epoch=S, iter=0, x^S 에서 평가
    epoch 별 Σ‖v‖², Σ‖u‖² 는 epoch 종료 시 해당 스냅샷 레코드에 기록된다.
    """

    records: List[TraceRecord] = field(default_factory=list)
    final_x: Optional[ParamVector] = None
    diverged: bool = False
    diagnostic: str = ""
    extras: Dict[str, float] = field(default_factory=dict)

    def append(self, record: TraceRecord) -> int:
        self.records.append(record)
        return len(self.records) - 1

    def attach_sums(self, index: int, sum_v_sq: float, sum_u_sq: float) -> None:
        self.records[index] = replace(
            self.records[index], sum_v_sq=sum_v_sq, sum_u_sq=sum_u_sq
        )

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss

    @property
    def final_grad_norm_sq(self) -> float:
        return self.records[-1].grad_norm_sq

    def epoch_sums(self) -> List[Tuple[int, float, float]]:
        """(epoch, Σ‖v‖², Σ‖u‖²) - 측정된 epoch만"""
        return [
            (r.epoch, r.sum_v_sq, r.sum_u_sq)
            for r in self.records
            if r.iter == 0 and not np.isnan(r.sum_v_sq)
        ]

    def ergodic_grad_norm_sq(self) -> float:
        """내부 반복 레코드(마지막 x^S 레코드 제외)의 ‖∇f‖² 평균"""
        if len(self.records) < 2:
            return float("nan")
        last_epoch = self.records[-1].epoch
        inner = [r.grad_norm_sq for r in self.records[:-1] if r.epoch < last_epoch]
        return float(np.mean(inner)) if inner else float("nan")

    def trajectory_equals(self, other: "Trace") -> bool:
        """
        wall_ns 를 제외한 모든 열과 최종 파라미터의 비트 단위 동일성

        sum_u_sq 는 양쪽 모두 측정된 경우에만 비교한다 (live 실행은 u 를 측정하지 않음).
        """
        if len(self.records) != len(other.records):
            return False
        keys = ["epoch", "iter", "loss", "grad_norm_sq", "sum_v_sq"]
        for mine, theirs in zip(self.records, other.records):
            for key in keys:
                a, b = getattr(mine, key), getattr(theirs, key)
                if a != b and not (np.isnan(a) and np.isnan(b)):
                    return False
            u_a, u_b = mine.sum_u_sq, theirs.sum_u_sq
            if not (np.isnan(u_a) or np.isnan(u_b)) and u_a != u_b:
                return False
        if self.final_x is None or other.final_x is None:
            return self.final_x is other.final_x
        return bool(np.array_equal(self.final_x, other.final_x))


@dataclass(frozen=True)
class StalenessSchedule:
    """
    공유 메모리 재생(replay)용 지연 스케줄

    iteration_sets[t]      : 반복 t 에서 놓친 갱신 집합 J(t) (전역 반복 번호)
    sample_sets[(t, k)]    : 배치 k 번째 표본만의 J(t, i_t) (있으면 우선)
    """

    delta: int
    iteration_sets: Dict[int, Tuple[int, ...]] = field(default_factory=dict)
    sample_sets: Dict[Tuple[int, int], Tuple[int, ...]] = field(default_factory=dict)

    def missed(self, t: int, k: Optional[int] = None) -> Tuple[int, ...]:
        if k is not None and (t, k) in self.sample_sets:
            return self.sample_sets[(t, k)]
        return self.iteration_sets.get(t, ())

    def has_sample_sets_for(self, t: int) -> bool:
        return any(key[0] == t for key in self.sample_sets)


@dataclass(frozen=True)
class DelayModel:
    """
    분산 채널 지연 모델

    kind:
        fifo_zero - 주입 지연 τ=0 (동시성으로 인한 지연만 Δ 이내 허용)
        uniform   - τ ~ U{0..Δ}
        fixed     - τ = Δ
    """

    kind: str
    delta: int
    seed: int = 0

    KINDS = ("fifo_zero", "uniform", "fixed")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise InvalidInputError(f"알 수 없는 지연 모델: {self.kind}")
        if self.delta < 0:
            raise InvalidInputError(f"Δ는 0 이상이어야 함: {self.delta}")

    def sampler(self) -> Callable[[], int]:
        """주입 지연 τ 를 하나씩 돌려주는 결정적 함수"""
        rng = np.random.default_rng([self.seed, 7919])

        def draw() -> int:
            if self.kind == "fifo_zero":
                return 0
            if self.kind == "fixed":
                return self.delta
            return int(rng.integers(0, self.delta + 1))

        return draw


@dataclass(frozen=True)
class TheoryParams:
    """c_t/Γ_t 점화식 입력"""

    L: float
    eta: float
    beta: float
    b: int
    m: int
    d: int
    n: int
    Delta: int
    u0: float = 0.1
    alpha: float = 1.0
    mode: str = "shared"

    def __post_init__(self) -> None:
        if self.mode not in ("shared", "distributed"):
            raise InvalidInputError(f"알 수 없는 mode: {self.mode}")
        if self.L <= 0 or self.eta <= 0 or self.beta < 0:
            raise InvalidInputError("L, eta 는 양수, beta 는 0 이상이어야 함")
        if self.b < 1 or self.m < 1 or self.d < 1 or self.n < 1 or self.Delta < 0:
            raise InvalidInputError("b, m, d, n ≥ 1, Δ ≥ 0 이어야 함")


@dataclass(frozen=True)
class TheoryReport:
    """이론 계산 결과 (JSON 직렬화 대상)"""

    mode: str
    c: List[float]  # c_0 .. c_m
    Gamma: List[float]  # Γ_0 .. Γ_{m-1}
    gamma: float
    theta: float
    c0_closed: float
    feasible: bool
    lyapunov_condition_ok: bool
    bound_value: Optional[float] = None
    bound_label: str = ""
