"""
지연(staleness) 모델

- 공유 메모리 재생용 StalenessSchedule 생성, 검증, 텍스트 직렬화
- 분산 채널용 DelayModel 생성
"""

import logging
import re
from typing import Dict, Iterable, Tuple

import numpy as np

from core.domain.errors import InvalidInputError, ScheduleError
from core.domain.models import DelayModel, StalenessSchedule

logger = logging.getLogger("asysvrg")

SCHEDULE_MODELS = ("none", "uniform", "adversarial_max")

_LINE = re.compile(r"^(\d+)(?:/(\d+))?\s*:\s*(.*)$")
_HEADER = re.compile(r"^#\s*delta\s*=\s*(\d+)\s*$")


def lookback_window(t: int, m: int, delta: int) -> range:
    """반복 t 가 참조할 수 있는 j (같은 epoch, t−Δ ≤ j < t), 내림차순"""
    epoch_start = (t // m) * m
    return range(t - 1, max(t - delta, epoch_start) - 1, -1)


def make_staleness_schedule(
    S: int, m: int, delta: int, model: str, seed: int = 0
) -> StalenessSchedule:
    """
    반복별 놓친 갱신 집합 J(t) 생성

    model:
        none            - 모든 J(t) 가 빈 집합
        uniform         - 창 안의 각 반복을 독립적으로 1/2 확률로 포함
        adversarial_max - 창 전체 (가장 오래된 읽기)
    창은 epoch 경계에서 잘린다 (epoch 시작 시 모든 워커가 정지하므로).
    """
    if delta < 0:
        raise InvalidInputError(f"Δ는 0 이상이어야 함: {delta}")
    if model not in SCHEDULE_MODELS:
        raise InvalidInputError(f"알 수 없는 스케줄 모델: {model} (가능: {SCHEDULE_MODELS})")
    if S < 0 or m < 1:
        raise InvalidInputError(f"S ≥ 0, m ≥ 1 이어야 함: S={S}, m={m}")

    sets: Dict[int, Tuple[int, ...]] = {}
    if model == "none" or delta == 0:
        return StalenessSchedule(delta=delta, iteration_sets=sets)

    rng = np.random.default_rng([seed, 31337])
    for t in range(S * m):
        window = list(lookback_window(t, m, delta))
        if not window:
            continue
        if model == "adversarial_max":
            chosen = tuple(window)
        else:
            keep = rng.random(len(window)) < 0.5
            chosen = tuple(j for j, k in zip(window, keep) if k)
        if chosen:
            sets[t] = chosen
    return StalenessSchedule(delta=delta, iteration_sets=sets)


def _check_set(t: int, js: Iterable[int], m: int, delta: int, total: int) -> None:
    if not 0 <= t < total:
        raise ScheduleError(f"반복 {t} 는 전체 반복 범위 [0, {total}) 밖")
    epoch_start = (t // m) * m
    for j in js:
        if j >= t:
            raise ScheduleError(f"J({t}) 가 미래 반복 {j} 를 참조")
        if j < t - delta:
            raise ScheduleError(f"J({t}) 의 {j} 는 Δ={delta} 보다 오래된 반복")
        if j < epoch_start:
            raise ScheduleError(f"J({t}) 의 {j} 는 이전 epoch 의 반복")


def validate_schedule(sched: StalenessSchedule, S: int, m: int, b: int) -> None:
    """미래, 이전 epoch, Δ 초과 참조와 잘못된 배치 원소 번호를 거부"""
    total = S * m
    for t, js in sched.iteration_sets.items():
        _check_set(t, js, m, sched.delta, total)
    for (t, k), js in sched.sample_sets.items():
        if not 0 <= k < b:
            raise ScheduleError(f"J({t}, {k}) 의 배치 원소 번호가 [0, {b}) 밖")
        _check_set(t, js, m, sched.delta, total)


def format_schedule(sched: StalenessSchedule) -> str:
    """`t: j1,j2` / `t/k: j1,j2` 줄 형식"""
    lines = [f"# delta = {sched.delta}"]
    for t in sorted(sched.iteration_sets):
        lines.append(f"{t}: {','.join(str(j) for j in sched.iteration_sets[t])}")
    for t, k in sorted(sched.sample_sets):
        lines.append(f"{t}/{k}: {','.join(str(j) for j in sched.sample_sets[(t, k)])}")
    return "\n".join(lines) + "\n"


def parse_schedule(text: str) -> StalenessSchedule:
    """
    format_schedule 의 역변환

    `# delta = Δ` 머리줄이 없으면 Δ 는 가장 먼 참조 거리로 정한다.
    """
    delta = None
    iteration_sets: Dict[int, Tuple[int, ...]] = {}
    sample_sets: Dict[Tuple[int, int], Tuple[int, ...]] = {}
    lookback = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        header = _HEADER.match(line)
        if header:
            delta = int(header.group(1))
            continue
        if line.startswith("#"):
            continue
        match = _LINE.match(line)
        if not match:
            raise ScheduleError(f"line {lineno}: 형식 오류 '{raw}'")
        t = int(match.group(1))
        body = match.group(3).strip()
        try:
            js = tuple(sorted((int(tok) for tok in body.split(",") if tok.strip()), reverse=True))
        except ValueError as e:
            raise ScheduleError(f"line {lineno}: 반복 번호가 정수가 아님 '{body}'") from e
        if js:
            lookback = max(lookback, t - min(js))
        if match.group(2) is None:
            if t in iteration_sets:
                raise ScheduleError(f"line {lineno}: 반복 {t} 중복")
            iteration_sets[t] = js
        else:
            key = (t, int(match.group(2)))
            if key in sample_sets:
                raise ScheduleError(f"line {lineno}: {key[0]}/{key[1]} 중복")
            sample_sets[key] = js

    if delta is None:
        logger.warning(f"스케줄에 delta 머리줄이 없어 Δ={lookback} 로 가정")
        delta = lookback
    return StalenessSchedule(delta=delta, iteration_sets=iteration_sets, sample_sets=sample_sets)


def make_delay_model(kind: str, delta: int, seed: int = 0) -> DelayModel:
    """kind ∈ {fifo_zero, uniform, fixed}, fixed 는 τ = Δ"""
    if delta < 0:
        raise InvalidInputError(f"Δ는 0 이상이어야 함: {delta}")
    return DelayModel(kind=kind, delta=delta, seed=seed)
