"""
수렴 이론 계산기

공유 메모리 (d 좌표 중 하나씩 갱신하는 분석):
    D  = d − 2L²Δ²η²
    θ  = ηβ/d + 4L²η²/(D·b)
    r  = 4L²/(D·b) · (L²Δ²η³/(2d) + η²L/2)
    c_t = c_{t+1}(1+θ) + r,                         c_m = 0
    Γ_t = η/(2d) − 4/D · (L²Δ²η³/(2d) + η²L/2 + c_{t+1}η²)
분산 메모리: 위 식에서 d 를 1 로 둔 형태.

모든 함수는 순수 함수다.
"""

import math
from dataclasses import asdict
from typing import Dict, List, Mapping, Optional, Tuple

from core.domain.errors import InfeasibleParametersError, InvalidInputError
from core.domain.models import TheoryParams, TheoryReport

MODES = ("shared", "distributed")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise InvalidInputError(f"알 수 없는 mode: {mode} (가능: {MODES})")


def _dim(p: TheoryParams) -> float:
    """공유 모드는 d, 분산 모드는 1"""
    return float(p.d) if p.mode == "shared" else 1.0


def denominator(p: TheoryParams) -> float:
    """d − 2L²Δ²η² (공유) / 1 − 2L²Δ²η² (분산)"""
    return _dim(p) - 2.0 * p.L**2 * p.Delta**2 * p.eta**2


def _checked_denominator(p: TheoryParams) -> float:
    D = denominator(p)
    if not D > 0:
        raise InfeasibleParametersError(
            f"{p.mode} 분모가 양수가 아님: {_dim(p):g} − 2L²Δ²η² = {D:.6g}"
        )
    return D


def _delay_term(p: TheoryParams) -> float:
    """L²Δ²η³/(2d) + η²L/2"""
    return p.L**2 * p.Delta**2 * p.eta**3 / (2.0 * _dim(p)) + p.eta**2 * p.L / 2.0


def theta(p: TheoryParams) -> float:
    D = _checked_denominator(p)
    return p.eta * p.beta / _dim(p) + 4.0 * p.L**2 * p.eta**2 / (D * p.b)


def increment(p: TheoryParams) -> float:
    """점화식의 상수항 r"""
    D = _checked_denominator(p)
    return 4.0 * p.L**2 / (D * p.b) * _delay_term(p)


def c_sequence(p: TheoryParams) -> List[float]:
    """
    c_0 .. c_m (c[t] = c_t, c[m] = 0), c_m 에서 역방향으로 계산

    Raises:
        InfeasibleParametersError: 분모가 양수가 아님
    """
    growth = 1.0 + theta(p)
    r = increment(p)
    c = [0.0] * (p.m + 1)
    for t in range(p.m - 1, -1, -1):
        c[t] = c[t + 1] * growth + r
    return c


def c0_closed_form(p: TheoryParams) -> float:
    """c_0 = r·((1+θ)^m − 1)/θ, θ = 0 이면 r·m"""
    th = theta(p)
    r = increment(p)
    if th == 0.0:
        return r * p.m
    return r * math.expm1(p.m * math.log1p(th)) / th


def gamma_sequence(p: TheoryParams, c: Optional[List[float]] = None) -> List[float]:
    """Γ_0 .. Γ_{m−1}"""
    D = _checked_denominator(p)
    c = c if c is not None else c_sequence(p)
    lead = p.eta / (2.0 * _dim(p))
    base = _delay_term(p)
    return [lead - 4.0 / D * (base + c[t + 1] * p.eta**2) for t in range(p.m)]


def gamma(p: TheoryParams) -> Tuple[float, bool]:
    """(γ = min_t Γ_t, 모든 Γ_t > 0 여부)"""
    gammas = gamma_sequence(p)
    g = min(gammas)
    return g, all(value > 0 for value in gammas)


def lyapunov_condition_holds(p: TheoryParams, c: Optional[List[float]] = None) -> bool:
    """모든 t 에 대해 c_{t+1} ≤ β/2"""
    c = c if c is not None else c_sequence(p)
    return all(value <= p.beta / 2.0 for value in c[1:])


def delay_bound(mode: str, u0: float, b: int, d: int = 1) -> float:
    """
    Δ² 상한

    shared      : min{d/(2u₀b), (3d − 28u₀bd)/(28u₀²b²)}
    distributed : min{1/(2u₀b), (3 − 28u₀b)/(28u₀²b²)}
    두 번째 항이 음수면 그대로 반환한다 (허용되는 Δ 없음).
    """
    _check_mode(mode)
    if not 0 < u0 < 1:
        raise InvalidInputError(f"u0 는 (0, 1) 범위여야 함: {u0}")
    if b < 1:
        raise InvalidInputError(f"b 는 1 이상이어야 함: {b}")
    dim = float(d) if mode == "shared" else 1.0
    first = dim / (2.0 * u0 * b)
    second = (3.0 * dim - 28.0 * u0 * b * dim) / (28.0 * u0**2 * b**2)
    return min(first, second)


def max_delay(mode: str, u0: float, b: int, d: int = 1) -> int:
    """Δ² < delay_bound 를 만족하는 가장 큰 정수 Δ (없으면 −1)"""
    bound = delay_bound(mode, u0, b, d)
    if bound <= 0:
        return -1
    delta = math.isqrt(max(int(math.floor(bound)), 0))
    while delta * delta >= bound and delta >= 0:
        delta -= 1
    return delta


def recommended_settings(
    mode: str, n: int, alpha: float, u0: float, b: int, d: int, L: float
) -> Tuple[float, float, int]:
    """
    (η, β, m) = (u₀b/(Lnᵅ), 2L, ⌊d·nᵅ/(6u₀b)⌋)   (분산은 d 없이)

    Raises:
        InvalidInputError: α ∉ (0, 1], u₀ ∉ (0, 1), m = 0
    """
    _check_mode(mode)
    if not 0 < alpha <= 1:
        raise InvalidInputError(f"alpha 는 (0, 1] 범위여야 함: {alpha}")
    if not 0 < u0 < 1:
        raise InvalidInputError(f"u0 는 (0, 1) 범위여야 함: {u0}")
    if n < 1 or b < 1 or d < 1 or not L > 0:
        raise InvalidInputError("n, b, d ≥ 1, L > 0 이어야 함")

    n_alpha = float(n) ** alpha
    eta = u0 * b / (L * n_alpha)
    beta = 2.0 * L
    scale = float(d) if mode == "shared" else 1.0
    m = math.floor(scale * n_alpha / (6.0 * u0 * b))
    if m < 1:
        raise InvalidInputError(f"권장 m 이 0 (내부 반복 없음): n={n}, u0={u0}, b={b}")
    return eta, beta, int(m)


def side_condition_holds(
    mode: str, n: int, alpha: float, u0: float, b: int, d: int, delta: int
) -> bool:
    """큰 n 조건: d·nᵅ ≤ d·n²ᵅ − 2Δ²u₀²b² (분산은 d 없이)"""
    _check_mode(mode)
    scale = float(d) if mode == "shared" else 1.0
    n_alpha = float(n) ** alpha
    return scale * n_alpha <= scale * n_alpha**2 - 2.0 * delta**2 * u0**2 * b**2


def ergodic_bound(p: TheoryParams, f0: float, fstar: float, T: int) -> float:
    """(f(x⁰) − f(x*)) / (T·γ)"""
    if T < 1:
        raise InvalidInputError(f"T 는 1 이상이어야 함: {T}")
    if f0 < fstar:
        raise InvalidInputError(f"f0({f0}) < fstar({fstar})")
    g, feasible = gamma(p)
    if not feasible or not g > 0:
        raise InfeasibleParametersError(f"γ={g:.6g} 가 양수가 아님 - 에르고딕 상한 없음")
    return (f0 - fstar) / (T * g)


def corollary1_factor(p: TheoryParams) -> Optional[float]:
    """Σ‖v‖² ≤ factor·Σ‖u‖² 의 factor. 분모 ≤ 0 이면 None"""
    D = denominator(p)
    if not D > 0:
        return None
    return 2.0 * _dim(p) / D


def speedup(times: Mapping[int, float]) -> Dict[int, float]:
    """speedup(T) = time(1)/time(T)"""
    if 1 not in times:
        raise InvalidInputError("직렬(1 워커) 시간이 없음")
    if any(not value > 0 for value in times.values()):
        raise InvalidInputError("모든 실행 시간은 양수여야 함")
    serial = float(times[1])
    return {workers: serial / float(value) for workers, value in sorted(times.items())}


def theory_report(
    p: TheoryParams,
    f0: Optional[float] = None,
    fstar: Optional[float] = None,
    T: Optional[int] = None,
    diagnostic_only: bool = False,
) -> TheoryReport:
    """
    c, Γ, γ, θ, 닫힌 형식 c_0, 실현 가능성, Lyapunov 조건, (선택) 에르고딕 상한

    diagnostic_only=True 는 fstar 가 관측 최솟값일 때 (비볼록 문제) 표시용.
    """
    c = c_sequence(p)
    gammas = gamma_sequence(p, c)
    g = min(gammas)
    feasible = all(value > 0 for value in gammas)

    bound_value = None
    bound_label = ""
    if f0 is not None and fstar is not None and T is not None and feasible:
        # x⁰ 가 최적점이면 반올림 때문에 f0 < f* 가 될 수 있음
        bound_value = ergodic_bound(p, f0, min(fstar, f0), T)
        bound_label = "diagnostic only" if diagnostic_only else "exact f*"

    return TheoryReport(
        mode=p.mode,
        c=c,
        Gamma=gammas,
        gamma=g,
        theta=theta(p),
        c0_closed=c0_closed_form(p),
        feasible=feasible,
        lyapunov_condition_ok=lyapunov_condition_holds(p, c),
        bound_value=bound_value,
        bound_label=bound_label,
    )


def report_as_dict(report: TheoryReport) -> Dict[str, object]:
    return asdict(report)
