"""
유한합 목적함수 f(x) = (1/n) Σ f_i(x)

세 가지 문제:
    - least_squares       f_i = ½(a_i·x − y_i)² + (C/2)‖x‖²
    - logistic_nonconvex  f_i = log(1+exp(−y_i a_i·x)) + λΣ x_j²/(1+x_j²) + (C/2)‖x‖²
    - mlp                 p×h×k, ReLU 은닉층, softmax 교차엔트로피 + (C/2)‖x‖²

모든 문제는 생성 후 불변이며 스레드 간 공유해도 안전하다.
"""

from abc import ABC, abstractmethod
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from core.domain.errors import InvalidInputError
from core.domain.models import Dataset, ParamVector

PROBLEM_KINDS = ("least_squares", "logistic_nonconvex", "mlp")

IndexArray = npt.NDArray[np.int64]


def ordered_sum(rows: Iterable[ParamVector], d: int) -> ParamVector:
    """행을 주어진 순서대로 누적 (합산 순서 고정)"""
    acc: Optional[ParamVector] = None
    for row in rows:
        if acc is None:
            acc = np.array(row, dtype=np.float64, copy=True)
        else:
            acc += row
    return acc if acc is not None else np.zeros(d, dtype=np.float64)


class FiniteSumProblem(ABC):
    """
    유한합 문제 추상 기반

    하위 클래스는 grad_rows / loss_rows 를 구현한다.
    grad_rows(x, idx)[k] 는 어떤 배치 구성에서도 grad_sample(x, idx[k]) 와
    비트 단위로 같아야 한다 (행별 독립 계산).
    """

    kind: str = ""

    def __init__(self, dataset: Dataset, regularization_weight: float = 0.0) -> None:
        if dataset.n < 1:
            raise InvalidInputError("표본이 없는 데이터셋으로 문제를 만들 수 없음 (n=0)")
        if regularization_weight < 0:
            raise InvalidInputError(f"C는 0 이상이어야 함: {regularization_weight}")
        self.dataset = dataset
        self.C = float(regularization_weight)
        self._all = np.arange(dataset.n, dtype=np.int64)

    # ------------------------------------------------------------------ #
    #  Shape / validation                                                  #
    # ------------------------------------------------------------------ #

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    @abstractmethod
    def d(self) -> int:
        """파라미터 차원"""

    def check_x(self, x: ParamVector) -> ParamVector:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise InvalidInputError(f"차원 불일치: {x.shape} (기대값 ({self.d},))")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("x에 유한하지 않은 값이 있음")
        return x

    def check_indices(self, indices: Sequence[int] | IndexArray) -> IndexArray:
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise InvalidInputError(f"표본 인덱스가 [0, {self.n}) 범위를 벗어남")
        return idx

    # ------------------------------------------------------------------ #
    #  Per-sample rows                                                     #
    # ------------------------------------------------------------------ #

    @abstractmethod
    def _loss_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        """정규화 항을 제외한 표본별 손실"""

    @abstractmethod
    def _grad_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        """정규화 항을 포함한 표본별 그래디언트 행렬 (len(idx) × d)"""

    def _regularizer(self, x: ParamVector) -> float:
        return 0.5 * self.C * float(x @ x)

    def grad_rows(self, x: ParamVector, indices: Sequence[int] | IndexArray) -> npt.NDArray[np.float64]:
        return self._grad_rows(self.check_x(x), self.check_indices(indices))

    def loss_sample(self, x: ParamVector, i: int) -> float:
        x = self.check_x(x)
        idx = self.check_indices([i])
        return float(self._loss_rows(x, idx)[0]) + self._regularizer(x)

    def grad_sample(self, x: ParamVector, i: int) -> ParamVector:
        """∇f_i(x) (정규화 그래디언트 C·x 포함)"""
        return self.grad_rows(x, [i])[0].copy()

    # ------------------------------------------------------------------ #
    #  Full objective                                                      #
    # ------------------------------------------------------------------ #

    def eval_loss(self, x: ParamVector) -> float:
        x = self.check_x(x)
        data = self._loss_rows(x, self._all)
        return float(np.sum(data) / self.n) + self._regularizer(x)

    def sum_grad(self, x: ParamVector, indices: Sequence[int] | IndexArray) -> ParamVector:
        """Σ_{i∈indices} ∇f_i(x) 를 인덱스 순서대로 합산"""
        rows = self.grad_rows(x, indices)
        return ordered_sum(rows, self.d)

    def grad_full(self, x: ParamVector) -> ParamVector:
        """(1/n) Σ_i ∇f_i(x), 합산 순서 i = 0..n-1 고정"""
        return self.sum_grad(x, self._all) / self.n

    def initial_point(self, seed: int) -> ParamVector:
        return np.zeros(self.d, dtype=np.float64)

    def error_rate(self, x: ParamVector, dataset: Optional[Dataset] = None) -> Optional[float]:
        """분류 오류율. 회귀 문제는 None"""
        return None


class LeastSquaresProblem(FiniteSumProblem):
    """½(a_i·x − y_i)² 최소제곱 (2차 함수 - L, x*, f* 를 정확히 알 수 있음)"""

    kind = "least_squares"

    def __init__(self, dataset: Dataset, regularization_weight: float = 0.0) -> None:
        super().__init__(dataset, regularization_weight)
        self._A = np.ascontiguousarray(dataset.features, dtype=np.float64)
        self._y = np.asarray(dataset.labels, dtype=np.float64)

    @property
    def d(self) -> int:
        return self.dataset.p

    def _residuals(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        # 행렬곱 대신 원소곱 + 행 합산: 배치 구성과 무관하게 행별 결과가 같다
        return (self._A[idx] * x).sum(axis=1) - self._y[idx]

    def _loss_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        r = self._residuals(x, idx)
        return 0.5 * r * r

    def _grad_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        r = self._residuals(x, idx)
        return self._A[idx] * r[:, None] + self.C * x

    def hessian_matvec(self, v: ParamVector) -> ParamVector:
        """H v, H = AᵀA/n + C·I"""
        return self._A.T @ (self._A @ v) / self.n + self.C * v

    def sample_curvatures(self) -> npt.NDArray[np.float64]:
        """∇²f_i = a_i a_iᵀ + C·I 의 최대 고유값 ‖a_i‖² + C"""
        return (self._A * self._A).sum(axis=1) + self.C

    def minimizer(self) -> ParamVector:
        """정규방정식 (AᵀA/n + C·I) x = Aᵀy/n 의 해"""
        H = self._A.T @ self._A / self.n + self.C * np.eye(self.d)
        rhs = self._A.T @ self._y / self.n
        return np.linalg.solve(H, rhs)


class LogisticNonconvexProblem(FiniteSumProblem):
    """이진 로지스틱 손실 + 비볼록 정규화 λΣ x_j²/(1+x_j²)"""

    kind = "logistic_nonconvex"

    def __init__(
        self,
        dataset: Dataset,
        regularization_weight: float = 0.0,
        nonconvex_weight: float = 0.1,
    ) -> None:
        super().__init__(dataset, regularization_weight)
        if nonconvex_weight < 0:
            raise InvalidInputError(f"λ는 0 이상이어야 함: {nonconvex_weight}")
        self.lam = float(nonconvex_weight)
        self._A = np.ascontiguousarray(dataset.features, dtype=np.float64)
        # 레이블 0 → −1, 나머지 → +1
        self._y = np.where(np.asarray(dataset.labels) > 0, 1.0, -1.0)

    @property
    def d(self) -> int:
        return self.dataset.p

    def _margins(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        return self._y[idx] * (self._A[idx] * x).sum(axis=1)

    def _regularizer(self, x: ParamVector) -> float:
        sq = x * x
        return self.lam * float(np.sum(sq / (1.0 + sq))) + super()._regularizer(x)

    def _loss_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        return np.logaddexp(0.0, -self._margins(x, idx))

    def _grad_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        z = self._margins(x, idx)
        # σ(−z) = 1/(1+e^z), 오버플로 없이 계산
        weight = np.exp(-np.logaddexp(0.0, z))
        data = self._A[idx] * (-self._y[idx] * weight)[:, None]
        reg = self.lam * 2.0 * x / (1.0 + x * x) ** 2 + self.C * x
        return data + reg

    def error_rate(self, x: ParamVector, dataset: Optional[Dataset] = None) -> Optional[float]:
        ds = dataset or self.dataset
        if ds.n == 0:
            return None
        y = np.where(np.asarray(ds.labels) > 0, 1.0, -1.0)
        pred = np.where(ds.features @ x > 0, 1.0, -1.0)
        return float(np.mean(pred != y))


class MlpProblem(FiniteSumProblem):
    """
    3층 신경망 p×h×k (ReLU 은닉층, softmax + ℓ2)

    파라미터 배치: W1(p×h), b1(h), W2(h×k), b2(k) → d = p·h + h + h·k + k
    ReLU 의 0 에서의 서브그래디언트는 0.
    """

    kind = "mlp"

    def __init__(
        self, dataset: Dataset, hidden: int = 16, regularization_weight: float = 0.0
    ) -> None:
        super().__init__(dataset, regularization_weight)
        if dataset.num_classes is None or dataset.num_classes < 2:
            raise InvalidInputError("mlp 는 2개 이상의 클래스를 가진 분류 데이터가 필요함")
        if hidden < 1:
            raise InvalidInputError(f"은닉 유닛 수는 1 이상이어야 함: {hidden}")
        self.layers: Tuple[int, int, int] = (dataset.p, hidden, dataset.num_classes)
        self._X = np.ascontiguousarray(dataset.features, dtype=np.float64)
        self._labels = np.asarray(dataset.labels, dtype=np.int64)

    @property
    def d(self) -> int:
        p, h, k = self.layers
        return p * h + h + h * k + k

    def unpack(self, x: ParamVector):
        p, h, k = self.layers
        o1 = p * h
        o2 = o1 + h
        o3 = o2 + h * k
        return (
            x[:o1].reshape(p, h),
            x[o1:o2],
            x[o2:o3].reshape(h, k),
            x[o3:],
        )

    def _logits(self, x: ParamVector, X: npt.NDArray[np.float64]):
        W1, b1, W2, b2 = self.unpack(x)
        z1 = X @ W1 + b1
        return np.maximum(z1, 0.0) @ W2 + b2

    def _loss_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        logits = self._logits(x, self._X[idx])
        shift = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shift).sum(axis=1))
        return log_norm - shift[np.arange(idx.size), self._labels[idx]]

    def _grad_one(self, x: ParamVector, i: int) -> ParamVector:
        W1, b1, W2, b2 = self.unpack(x)
        a = self._X[i]
        z1 = a @ W1 + b1
        h1 = np.maximum(z1, 0.0)
        logits = h1 @ W2 + b2
        e = np.exp(logits - logits.max())
        dlogits = e / e.sum()
        dlogits[self._labels[i]] -= 1.0

        dz = (W2 @ dlogits) * (z1 > 0.0)
        grad = np.concatenate(
            [np.outer(a, dz).ravel(), dz, np.outer(h1, dlogits).ravel(), dlogits]
        )
        return grad + self.C * x

    def _grad_rows(self, x: ParamVector, idx: IndexArray) -> npt.NDArray[np.float64]:
        rows = np.empty((idx.size, self.d), dtype=np.float64)
        for k, i in enumerate(idx):
            rows[k] = self._grad_one(x, int(i))
        return rows

    def initial_point(self, seed: int) -> ParamVector:
        """uniform(−1/√fan_in, +1/√fan_in) 가중치, 편향 0"""
        p, h, k = self.layers
        rng = np.random.default_rng(seed)
        W1 = rng.uniform(-1.0, 1.0, size=(p, h)) / np.sqrt(p)
        W2 = rng.uniform(-1.0, 1.0, size=(h, k)) / np.sqrt(h)
        return np.concatenate([W1.ravel(), np.zeros(h), W2.ravel(), np.zeros(k)])

    def error_rate(self, x: ParamVector, dataset: Optional[Dataset] = None) -> Optional[float]:
        ds = dataset or self.dataset
        if ds.n == 0:
            return None
        pred = self._logits(x, ds.features).argmax(axis=1)
        return float(np.mean(pred != np.asarray(ds.labels)))


def make_problem(
    kind: str,
    dataset: Dataset,
    regularization_weight: float = 0.0,
    nonconvex_weight: float = 0.1,
    hidden: int = 16,
) -> FiniteSumProblem:
    """문제 종류 이름으로 FiniteSumProblem 생성"""
    if kind == "least_squares":
        return LeastSquaresProblem(dataset, regularization_weight)
    if kind == "logistic_nonconvex":
        return LogisticNonconvexProblem(dataset, regularization_weight, nonconvex_weight)
    if kind == "mlp":
        return MlpProblem(dataset, hidden=hidden, regularization_weight=regularization_weight)
    raise InvalidInputError(f"알 수 없는 문제 종류: {kind} (가능: {PROBLEM_KINDS})")
