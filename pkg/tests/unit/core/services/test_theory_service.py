"""
수렴 이론 계산기 단위 테스트

손으로 계산한 값, 점화식 대 닫힌 형식 교차 검사, 단조성 성질.
"""

import numpy as np
import pytest

from core.domain.errors import InfeasibleParametersError, InvalidInputError
from core.domain.models import TheoryParams
from core.services.theory_service import (
    c0_closed_form,
    c_sequence,
    corollary1_factor,
    delay_bound,
    ergodic_bound,
    gamma,
    gamma_sequence,
    max_delay,
    recommended_settings,
    report_as_dict,
    side_condition_holds,
    speedup,
    theory_report,
)


def _hand(**kwargs) -> TheoryParams:
    """분산, Δ=0, L=1, η=0.1, b=1, β=0, m=1"""
    base = dict(L=1.0, eta=0.1, beta=0.0, b=1, m=1, d=7, n=10, Delta=0, mode="distributed")
    base.update(kwargs)
    return TheoryParams(**base)


def _random_feasible(rng: np.random.Generator, mode: str) -> TheoryParams:
    L = float(rng.uniform(0.5, 2.0))
    Delta = int(rng.integers(0, 6))
    eta = float(rng.uniform(1e-4, 0.1)) / (L * (Delta + 1))
    return TheoryParams(
        L=L,
        eta=eta,
        beta=float(rng.uniform(0.0, 2.0 * L)),
        b=int(rng.integers(1, 20)),
        m=int(rng.integers(1, 300)),
        d=int(rng.integers(1, 100)),
        n=int(rng.integers(10, 5000)),
        Delta=Delta,
        mode=mode,
    )


class TestHandCases:
    def test_c_sequence_one_step(self):
        c = c_sequence(_hand())
        assert c[-1] == 0.0
        assert c[0] == pytest.approx(0.02, rel=1e-12)

    def test_closed_form_one_step(self):
        assert c0_closed_form(_hand()) == pytest.approx(0.02, rel=1e-12)

    def test_gamma_one_step(self):
        g, feasible = gamma(_hand())
        assert g == pytest.approx(0.03, rel=1e-12)
        assert feasible

    def test_shared_mode_divides_by_dimension(self):
        p = _hand(mode="shared", d=1)
        assert c_sequence(p)[0] == pytest.approx(0.02, rel=1e-12)

    def test_ergodic_bound_by_hand(self):
        assert ergodic_bound(_hand(), 1.0, 0.0, 100) == pytest.approx(1 / 3, rel=1e-12)


class TestRecurrence:
    @pytest.mark.parametrize("mode", ["shared", "distributed"])
    def test_closed_form_matches_recurrence(self, mode):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            p = _random_feasible(rng, mode)
            c0 = c_sequence(p)[0]
            assert abs(c0_closed_form(p) - c0) <= 1e-10 * abs(c0)

    def test_single_step_closed_form_is_increment(self):
        p = _hand(beta=1.5, Delta=2, mode="shared", d=20)
        assert c0_closed_form(p) == pytest.approx(c_sequence(p)[0], rel=1e-14)

    @pytest.mark.parametrize("mode", ["shared", "distributed"])
    def test_monotone_structure(self, mode):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = _random_feasible(rng, mode)
            c = c_sequence(p)
            gammas = gamma_sequence(p, c)
            assert all(c[t] >= c[t + 1] for t in range(p.m))
            assert all(gammas[t] <= gammas[t + 1] for t in range(p.m - 1))
            assert gamma(p)[0] == gammas[0]

    def test_vanishing_step_is_feasible(self):
        g, feasible = gamma(_hand(eta=1e-8, m=10))
        assert feasible
        assert 0 < g < 1e-8

    def test_gamma_nonincreasing_in_delay(self):
        values = [
            gamma(TheoryParams(L=1.0, eta=0.01, beta=2.0, b=4, m=50, d=10, n=100, Delta=delta))[0]
            for delta in range(8)
        ]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_non_positive_denominator_rejected(self):
        p = _hand(eta=1.0, Delta=1)
        with pytest.raises(InfeasibleParametersError):
            c_sequence(p)
        with pytest.raises(InfeasibleParametersError):
            gamma(p)
        assert corollary1_factor(p) is None


class TestDelayBound:
    def test_shared(self):
        assert delay_bound("shared", 0.01, 10, 100) == pytest.approx(20 / 0.28, rel=1e-12)
        assert max_delay("shared", 0.01, 10, 100) == 8

    def test_distributed(self):
        assert delay_bound("distributed", 0.001, 10) == pytest.approx(50.0, rel=1e-12)
        assert max_delay("distributed", 0.001, 10) == 7

    def test_no_admissible_delay(self):
        assert delay_bound("distributed", 0.5, 1) < 0
        assert max_delay("distributed", 0.5, 1) == -1

    @pytest.mark.parametrize("kwargs", [dict(u0=0.0), dict(u0=1.0), dict(b=0), dict(mode="hybrid")])
    def test_domain(self, kwargs):
        args = dict(mode="shared", u0=0.1, b=1, d=1)
        args.update(kwargs)
        with pytest.raises(InvalidInputError):
            delay_bound(**args)


class TestRecommendedSettings:
    def test_shared(self):
        eta, beta, m = recommended_settings("shared", 1000, 1.0, 0.1, 10, 50, 2.0)
        assert eta == pytest.approx(5e-4, rel=1e-12)
        assert (beta, m) == (4.0, 8333)

    def test_distributed_ignores_dimension(self):
        _, _, m = recommended_settings("distributed", 1000, 1.0, 0.1, 10, 50, 2.0)
        assert m == 166

    @pytest.mark.parametrize(
        "args",
        [
            ("shared", 1000, 0.0, 0.1, 10, 50, 2.0),
            ("shared", 1000, 1.0, 1.5, 10, 50, 2.0),
            ("shared", 1000, 1.0, 0.1, 10, 50, 0.0),
            ("distributed", 1, 1.0, 0.1, 10, 50, 2.0),
        ],
    )
    def test_rejected(self, args):
        with pytest.raises(InvalidInputError):
            recommended_settings(*args)

    @pytest.mark.parametrize("mode", ["shared", "distributed"])
    def test_recommended_parameters_within_delay_bound_are_feasible(self, mode):
        n, alpha, u0, b, d, L = 1000, 1.0, 0.1, 1, 50, 2.0
        delta = max_delay(mode, u0, b, d)
        assert delta >= 0
        assert side_condition_holds(mode, n, alpha, u0, b, d, delta)
        eta, beta, m = recommended_settings(mode, n, alpha, u0, b, d, L)
        p = TheoryParams(L=L, eta=eta, beta=beta, b=b, m=m, d=d, n=n, Delta=delta, u0=u0, alpha=alpha, mode=mode)
        g, feasible = gamma(p)
        assert feasible and g > 0

    def test_side_condition_fails_for_tiny_n(self):
        assert not side_condition_holds("distributed", 1, 1.0, 0.1, 10, 1, 5)


class TestErgodicBound:
    def test_zero_gap(self):
        assert ergodic_bound(_hand(), 2.0, 2.0, 10) == 0.0

    def test_inverse_in_iterations(self):
        p = _hand()
        assert ergodic_bound(p, 1.0, 0.0, 200) == pytest.approx(ergodic_bound(p, 1.0, 0.0, 100) / 2)

    def test_linear_in_gap(self):
        p = _hand()
        assert ergodic_bound(p, 3.0, 0.0, 100) == pytest.approx(3 * ergodic_bound(p, 1.0, 0.0, 100))

    def test_infeasible_gamma_rejected(self):
        with pytest.raises(InfeasibleParametersError):
            ergodic_bound(_hand(eta=0.5), 1.0, 0.0, 10)

    @pytest.mark.parametrize("f0, fstar, T", [(1.0, 0.0, 0), (0.0, 1.0, 10)])
    def test_domain(self, f0, fstar, T):
        with pytest.raises(InvalidInputError):
            ergodic_bound(_hand(), f0, fstar, T)


class TestSpeedup:
    def test_definition(self):
        result = speedup({1: 100.0, 4: 25.0, 2: 60.0})
        assert result[1] == 1.0
        assert result[4] == 4.0
        assert result[2] == pytest.approx(5 / 3)
        assert list(result) == [1, 2, 4]

    def test_missing_serial_rejected(self):
        with pytest.raises(InvalidInputError):
            speedup({2: 10.0})

    def test_non_positive_time_rejected(self):
        with pytest.raises(InvalidInputError):
            speedup({1: 10.0, 2: 0.0})


class TestReport:
    def test_report_with_bound(self):
        report = theory_report(_hand(), f0=1.0, fstar=0.0, T=100)
        assert report.feasible
        assert report.bound_value == pytest.approx(1 / 3, rel=1e-12)
        assert report.bound_label == "exact f*"
        assert len(report.c) == 2 and len(report.Gamma) == 1

    def test_diagnostic_label(self):
        report = theory_report(_hand(), f0=1.0, fstar=0.5, T=10, diagnostic_only=True)
        assert report.bound_label == "diagnostic only"

    def test_infeasible_report_has_no_bound(self):
        report = theory_report(_hand(eta=0.5), f0=1.0, fstar=0.0, T=10)
        assert not report.feasible
        assert report.bound_value is None

    def test_report_serializes_sequences(self):
        data = report_as_dict(theory_report(_hand(m=3)))
        assert data["mode"] == "distributed"
        assert len(data["c"]) == 4
        assert data["c"][-1] == 0.0
