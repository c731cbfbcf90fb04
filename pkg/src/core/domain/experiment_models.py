# src/core/domain/experiment_models.py
"""
하네스 결과 모델 (summary JSON 스키마)

NaN / inf 는 JSON 에서 null 로 기록된다.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict


class SgdGridResult(BaseModel):
    alpha: float
    beta: float
    final_loss: Optional[float]
    diverged: bool


class CorollaryEpochRow(BaseModel):
    epoch: int
    sum_v_sq: float
    sum_u_sq: float
    ratio: Optional[float]
    passed: bool


class Corollary1Report(BaseModel):
    """Σ‖v‖² ≤ factor·Σ‖u‖² epoch 별 검사 (Δ=0 이면 두 합이 비트 단위로 같아야 통과)"""

    mode: str
    delta: int
    factor: Optional[float]
    applicable: bool
    message: str = ""
    epochs: List[CorollaryEpochRow] = []

    @property
    def all_passed(self) -> bool:
        return self.applicable and all(row.passed for row in self.epochs)


class TheoryVerdict(BaseModel):
    mode: str
    L: float
    eta: float
    beta: float
    m: int
    delta: int
    feasible: bool
    gamma: Optional[float] = None
    lyapunov_condition_ok: Optional[bool] = None
    delay_bound: Optional[float] = None
    side_condition_ok: Optional[bool] = None
    ergodic_bound: Optional[float] = None
    bound_label: str = ""
    measured_ergodic_grad_norm_sq: Optional[float] = None
    note: str = ""
    error: str = ""  # 비어 있지 않으면 실행 실패 (이론 권장값 사용 시 실현 불가능)


class ExperimentSummary(BaseModel):
    """
    실행 요약

    방법(method) 이름은 넣지 않는다: sgd_epochs=0 인 웜스타트는 일반 SVRG 와 같은 산출물.
    artifacts 의 경로는 출력 디렉터리 기준 상대 경로.
    """

    model_config = ConfigDict(ser_json_inf_nan="null")

    problem: str
    architecture: str
    n: int
    d: int
    final_loss: Optional[float]
    final_grad_norm_sq: Optional[float]
    train_error: Optional[float] = None
    test_error: Optional[float] = None
    clock: str
    elapsed: int
    wall_time_note: str = "데이터 적재 제외, 스냅샷 전체 그래디언트 포함"
    diverged: bool = False
    diagnostic: str = ""
    warm_start_epochs: int = 0
    sgd_grid: List[SgdGridResult] = []
    theory: Optional[TheoryVerdict] = None
    corollary1: Optional[Corollary1Report] = None
    artifacts: Dict[str, str] = {}
    extras: Dict[str, float] = {}

    @property
    def succeeded(self) -> bool:
        if self.diverged:
            return False
        if self.theory is not None and self.theory.error:
            return False
        return True


@dataclass
class ExperimentArtifacts:
    """run_experiment 결과: 출력 디렉터리와 기록된 파일"""

    output_dir: Path
    summary: ExperimentSummary
    paths: Dict[str, Path] = field(default_factory=dict)
    exit_ok: bool = True


class SweepRow(BaseModel):
    """워커 수별 목표 손실(직렬 최종 손실 × 1.01) 도달 시간과 speedup"""

    workers: int
    time_to_target: Optional[float]
    reached_target: bool
    final_loss: Optional[float]
    diverged: bool
    speedup: Optional[float]
