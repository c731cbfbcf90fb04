"""
문제 진단: 중앙 차분 그래디언트 검사, Lipschitz 상수 추정
"""

from typing import List, Optional

import numpy as np

from core.domain.errors import InvalidInputError
from core.domain.models import ParamVector
from core.domain.problems import FiniteSumProblem, LeastSquaresProblem

L_SAFETY_FACTOR = 1.5


def _central_differences(f, x: ParamVector, h: float) -> ParamVector:
    fd = np.empty_like(x)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = h
        fd[k] = (f(x + step) - f(x - step)) / (2.0 * h)
    return fd


def _relative_error(analytic: ParamVector, fd: ParamVector) -> float:
    scale = 1.0 + float(np.max(np.abs(analytic))) if analytic.size else 1.0
    return float(np.max(np.abs(analytic - fd))) / scale


def fd_check(problem: FiniteSumProblem, x: ParamVector, h: float = 1e-5) -> float:
    """
    max_k |∇f(x)_k − FD_k| / (1 + ‖∇f(x)‖∞)

    Raises:
        InvalidInputError: h ≤ 0
    """
    if not h > 0:
        raise InvalidInputError(f"차분 간격 h 는 양수여야 함: {h}")
    x = problem.check_x(x)
    return _relative_error(problem.grad_full(x), _central_differences(problem.eval_loss, x, h))


def fd_check_sample(
    problem: FiniteSumProblem, x: ParamVector, i: int, h: float = 1e-5
) -> float:
    """표본 하나 f_i 에 대한 fd_check"""
    if not h > 0:
        raise InvalidInputError(f"차분 간격 h 는 양수여야 함: {h}")
    x = problem.check_x(x)
    return _relative_error(
        problem.grad_sample(x, i),
        _central_differences(lambda z: problem.loss_sample(z, i), x, h),
    )


def power_iteration_lmax(problem: LeastSquaresProblem, iters: int = 500, tol: float = 1e-13, seed: int = 0) -> float:
    """AᵀA/n + C·I 의 최대 고유값"""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(problem.d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = problem.hessian_matvec(v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return problem.C
        v = w / norm
        new_lam = float(v @ problem.hessian_matvec(v))
        if abs(new_lam - lam) <= tol * max(1.0, abs(new_lam)):
            return new_lam
        lam = new_lam
    return lam


def probe_ratios(
    problem: FiniteSumProblem, num_probes: int, seed: int, radius: float = 1.0
) -> List[float]:
    """
    무작위 점 쌍 (x, y) 에서의 ‖∇f(x)−∇f(y)‖/‖x−y‖ 와 ‖∇f_i(x)−∇f_i(y)‖/‖x−y‖
    """
    if num_probes < 1:
        raise InvalidInputError(f"num_probes 는 1 이상이어야 함: {num_probes}")
    rng = np.random.default_rng([seed, 4099])
    base = problem.initial_point(seed)
    ratios: List[float] = []
    for _ in range(num_probes):
        x = base + radius * rng.standard_normal(problem.d) / np.sqrt(problem.d)
        y = x + 1e-2 * rng.standard_normal(problem.d) / np.sqrt(problem.d)
        dist = float(np.linalg.norm(x - y))
        if dist == 0.0:
            continue
        ratios.append(float(np.linalg.norm(problem.grad_full(x) - problem.grad_full(y))) / dist)
        i = int(rng.integers(0, problem.n))
        ratios.append(
            float(np.linalg.norm(problem.grad_sample(x, i) - problem.grad_sample(y, i))) / dist
        )
    return ratios


def estimate_L(problem: FiniteSumProblem, num_probes: int = 16, seed: int = 0) -> float:
    """
    Lipschitz 상수

    least_squares: max(λ_max(∇²f), max_i λ_max(∇²f_i)), 전체와 표본 상수 중 큰 값
    그 외: 탐침 비율의 최댓값 × 1.5
    """
    if num_probes < 1:
        raise InvalidInputError(f"num_probes 는 1 이상이어야 함: {num_probes}")
    if isinstance(problem, LeastSquaresProblem):
        return max(power_iteration_lmax(problem, seed=seed), float(np.max(problem.sample_curvatures())))
    ratios = probe_ratios(problem, num_probes, seed)
    return L_SAFETY_FACTOR * max(ratios) if ratios else 0.0


def exact_fstar(problem: FiniteSumProblem) -> Optional[float]:
    """해석적 최솟값을 아는 문제(least_squares)만 f(x*)"""
    if isinstance(problem, LeastSquaresProblem):
        return problem.eval_loss(problem.minimizer())
    return None
