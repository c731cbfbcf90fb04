"""
Σ‖v‖² 대 Σ‖u‖² 경험적 검사

v: 실제로 적용된 (stale 읽기) VR 그래디언트, u: 같은 배치를 일관된 x_t 에서 계산한 값.
"""

import math

from core.domain.errors import InvalidInputError
from core.domain.experiment_models import Corollary1Report, CorollaryEpochRow
from core.domain.models import TheoryParams, Trace
from core.services.theory_service import corollary1_factor


def check_corollary1(trace: Trace, p: TheoryParams) -> Corollary1Report:
    """
    epoch 별 비율 Σ‖v‖²/Σ‖u‖² 와 상한 factor 비교

    Raises:
        InvalidInputError: Trace 에 Σ‖u‖² 누적값이 없음 (live 실행 등)
    """
    sums = trace.epoch_sums()
    if not sums or any(math.isnan(sum_u) for _, _, sum_u in sums):
        raise InvalidInputError("Trace 에 epoch 별 Σ‖v‖², Σ‖u‖² 누적값이 없음 (replay/시뮬레이션 실행 필요)")

    factor = corollary1_factor(p)
    if factor is None:
        return Corollary1Report(
            mode=p.mode,
            delta=p.Delta,
            factor=None,
            applicable=False,
            message="bound inapplicable: 분모 ≤ 0",
        )

    rows = []
    for epoch, sum_v, sum_u in sums:
        ratio = sum_v / sum_u if sum_u > 0 else None
        if p.Delta == 0:
            passed = sum_v == sum_u
        else:
            passed = sum_v <= factor * sum_u
        rows.append(
            CorollaryEpochRow(epoch=epoch, sum_v_sq=sum_v, sum_u_sq=sum_u, ratio=ratio, passed=passed)
        )
    return Corollary1Report(
        mode=p.mode, delta=p.Delta, factor=factor, applicable=True, epochs=rows
    )
