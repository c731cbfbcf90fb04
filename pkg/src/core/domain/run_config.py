# src/core/domain/run_config.py
"""
실험 실행 설정 (평문 key = value 파일 ↔ RunConfig)
"""

from typing import Any, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ProblemKind = Literal["least_squares", "logistic_nonconvex", "mlp"]
Method = Literal["sgd", "svrg", "sgd_then_svrg"]
Architecture = Literal["serial", "shared", "distributed"]


class RunConfig(BaseModel):
    """
    단일 실험 설정

    problem / data
        problem, data_source(synthetic|idx), n, p, num_classes, noise, num_test,
        data_limit(idx 표본 수), hidden(mlp 은닉 유닛), C, lam(비볼록 정규화 λ)
    method
        sgd(sgd_alpha, sgd_beta 또는 격자), svrg(eta), sgd_then_svrg(sgd_epochs + 둘 다)
        use_theory_settings=true 면 (eta, m) 을 이론 권장값(u0, alpha_exp)으로 대체
    architecture
        serial, shared(num_workers, block_size, delta, schedule_model, shared_mode),
        distributed(num_workers, delay_kind, delta, dist_mode, latency)
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    # problem
    problem: ProblemKind = "least_squares"
    data_source: Literal["synthetic", "idx"] = "synthetic"
    n: int = Field(default=1000, ge=1)
    p: int = Field(default=50, ge=1)
    num_classes: int = Field(default=2, ge=2)
    noise: float = Field(default=0.1, ge=0.0)
    num_test: int = Field(default=0, ge=0)
    data_limit: int = Field(default=2000, ge=1)
    hidden: int = Field(default=16, ge=1)
    C: float = Field(default=0.0, ge=0.0)
    lam: float = Field(default=0.1, ge=0.0)

    # method
    method: Method = "svrg"
    sgd_alpha: float = Field(default=0.05, gt=0.0)
    sgd_beta: float = Field(default=0.5, ge=0.0, le=1.0)
    sgd_alpha_grid: Tuple[float, ...] = ()
    sgd_beta_grid: Tuple[float, ...] = ()
    sgd_epochs: int = Field(default=0, ge=0)
    eta: float = Field(default=0.05, gt=0.0)
    use_theory_settings: bool = False
    u0: float = Field(default=0.1, gt=0.0, lt=1.0)
    alpha_exp: float = Field(default=1.0, gt=0.0, le=1.0)
    beta: Optional[float] = Field(default=None, ge=0.0)

    # architecture
    architecture: Architecture = "serial"
    num_workers: int = Field(default=1, ge=1)
    block_size: int = Field(default=0, ge=0)  # 0 = 전체 좌표
    delta: int = Field(default=0, ge=0)
    schedule_model: Literal["none", "uniform", "adversarial_max"] = "none"
    shared_mode: Literal["live", "replay"] = "replay"
    delay_kind: Literal["fifo_zero", "uniform", "fixed"] = "fifo_zero"
    dist_mode: Literal["simulated", "threaded"] = "simulated"
    latency: int = Field(default=0, ge=0)

    # loop
    S: int = Field(default=10, ge=0)
    m: int = Field(default=100, ge=1)
    b: int = Field(default=10, ge=1)
    seed: int = 0
    clock: Literal["logical", "wall"] = "logical"
    grad_stride: int = Field(default=0, ge=0)
    lipschitz: Optional[float] = Field(default=None, gt=0.0)

    # output
    output_dir: Optional[str] = None
    event_log: bool = False

    @field_validator("sgd_alpha_grid", "sgd_beta_grid", mode="before")
    @classmethod
    def _split_grid(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(tok.strip() for tok in value.split(",") if tok.strip())
        return value

    @field_validator("sgd_alpha_grid")
    @classmethod
    def _positive_alphas(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(not a > 0 for a in value):
            raise ValueError("sgd_alpha_grid 의 값은 모두 양수여야 함")
        return value

    @field_validator("sgd_beta_grid")
    @classmethod
    def _unit_betas(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(not 0.0 <= bt <= 1.0 for bt in value):
            raise ValueError("sgd_beta_grid 의 값은 모두 [0, 1] 범위여야 함")
        return value

    @field_validator("beta", "lipschitz", "output_dir", mode="before")
    @classmethod
    def _empty_is_none(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in ("", "none"):
            return None
        return value

    @model_validator(mode="after")
    def _check_combination(self) -> "RunConfig":
        if self.method == "sgd" and self.architecture != "serial":
            raise ValueError("method=sgd 는 architecture=serial 에서만 실행 가능")
        if self.architecture == "serial" and self.num_workers != 1:
            raise ValueError("architecture=serial 은 num_workers=1 이어야 함")
        if self.problem == "least_squares" and self.data_source == "idx":
            raise ValueError("least_squares 는 회귀용 합성 데이터만 지원 (data_source=synthetic)")
        if self.problem == "logistic_nonconvex" and self.data_source == "synthetic" and self.num_classes != 2:
            raise ValueError("logistic_nonconvex 는 이진 분류 (num_classes=2)")
        return self

    @property
    def theory_mode(self) -> str:
        """공유 메모리는 좌표 단위 분석(shared), 직렬/분산은 전체 벡터 분석(distributed)"""
        return "shared" if self.architecture == "shared" else "distributed"

    @property
    def block(self) -> Optional[int]:
        return self.block_size or None

    def sgd_grid(self) -> Tuple[Tuple[float, float], ...]:
        """(α, β) 격자. 격자가 없으면 단일 (sgd_alpha, sgd_beta)"""
        alphas = self.sgd_alpha_grid or (self.sgd_alpha,)
        betas = self.sgd_beta_grid or (self.sgd_beta,)
        return tuple((a, bt) for a in alphas for bt in betas)
