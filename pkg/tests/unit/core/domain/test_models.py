"""
도메인 모델 단위 테스트
"""

import numpy as np
import pytest

from core.domain.errors import InvalidInputError
from core.domain.models import (
    Dataset,
    DelayModel,
    MiniBatch,
    SgdSchedule,
    StaleReads,
    StalenessSchedule,
    SyntheticSpec,
    Trace,
    TraceRecord,
)

NAN = float("nan")


def _trace(losses, sum_u=1.0, final_x=(1.0,)) -> Trace:
    trace = Trace()
    for epoch, loss in enumerate(losses[:-1]):
        trace.append(TraceRecord(epoch, 0, loss, loss * 2, wall_ns=epoch, sum_v_sq=1.0, sum_u_sq=sum_u))
    trace.append(TraceRecord(len(losses) - 1, 0, losses[-1], 0.5, wall_ns=99))
    trace.final_x = np.array(final_x)
    return trace


class TestDataset:
    def test_label_count_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            Dataset(features=np.zeros((3, 2)), labels=np.zeros(2))

    def test_non_finite_features_rejected(self):
        with pytest.raises(InvalidInputError):
            Dataset(features=np.array([[np.inf, 0.0]]), labels=np.zeros(1))

    def test_label_out_of_class_range_rejected(self):
        with pytest.raises(InvalidInputError):
            Dataset(features=np.zeros((2, 1)), labels=np.array([0, 2]), num_classes=2)

    def test_head(self):
        ds = Dataset(features=np.arange(6.0).reshape(3, 2), labels=np.array([0, 1, 0]), num_classes=2)
        assert ds.head(2).n == 2
        assert ds.head(0).n == 0


class TestSyntheticSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(n=0, p=2), dict(n=2, p=0), dict(n=2, p=2, num_classes=1), dict(n=2, p=2, task="ranking")],
    )
    def test_invalid_specs_rejected(self, kwargs):
        with pytest.raises(InvalidInputError):
            SyntheticSpec(**kwargs)


class TestBatchTypes:
    def test_minibatch_array(self):
        batch = MiniBatch(indices=(3, 1, 3))
        assert batch.b == 3
        assert batch.as_array().tolist() == [3, 1, 3]

    def test_uniform_stale_reads_share_one_vector(self):
        x = np.zeros(2)
        stale = StaleReads.uniform(x, 3, tau=2)
        assert stale.is_shared()
        assert stale.tau == (2, 2, 2)

    def test_distinct_vectors_not_shared(self):
        stale = StaleReads(vectors=(np.zeros(2), np.zeros(2)), tau=(0, 1))
        assert not stale.is_shared()

    @pytest.mark.parametrize("alpha, beta", [(0.0, 0.5), (0.1, 1.5), (0.1, -0.1)])
    def test_sgd_schedule_domain(self, alpha, beta):
        with pytest.raises(InvalidInputError):
            SgdSchedule(alpha=alpha, beta=beta)


class TestStalenessSchedule:
    def test_sample_set_overrides_iteration_set(self):
        sched = StalenessSchedule(delta=2, iteration_sets={5: (4,)}, sample_sets={(5, 1): (3, 4)})
        assert sched.missed(5) == (4,)
        assert sched.missed(5, 0) == (4,)
        assert sched.missed(5, 1) == (3, 4)
        assert sched.missed(6) == ()
        assert sched.has_sample_sets_for(5)
        assert not sched.has_sample_sets_for(4)


class TestDelayModel:
    def test_fixed_and_zero(self):
        assert DelayModel("fixed", 3).sampler()() == 3
        assert DelayModel("fifo_zero", 3).sampler()() == 0

    def test_uniform_is_seeded_and_bounded(self):
        first = DelayModel("uniform", 4, seed=1).sampler()
        second = DelayModel("uniform", 4, seed=1).sampler()
        draws = [first() for _ in range(50)]
        assert draws == [second() for _ in range(50)]
        assert all(0 <= tau <= 4 for tau in draws)

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidInputError):
            DelayModel("poisson", 1)


class TestTrace:
    def test_epoch_sums_only_for_measured_epochs(self):
        trace = _trace([3.0, 2.0, 1.0])
        assert trace.epoch_sums() == [(0, 1.0, 1.0), (1, 1.0, 1.0)]

    def test_final_values(self):
        trace = _trace([3.0, 2.0, 1.0])
        assert trace.final_loss == 1.0
        assert trace.final_grad_norm_sq == 0.5

    def test_ergodic_mean_excludes_final_record(self):
        trace = _trace([3.0, 2.0, 1.0])
        assert trace.ergodic_grad_norm_sq() == pytest.approx((6.0 + 4.0) / 2)

    def test_attach_sums(self):
        trace = Trace()
        index = trace.append(TraceRecord(0, 0, 1.0, 1.0, 0))
        trace.attach_sums(index, 2.0, 3.0)
        assert (trace.records[0].sum_v_sq, trace.records[0].sum_u_sq) == (2.0, 3.0)

    def test_trajectory_equality_ignores_wall_time(self):
        a = _trace([3.0, 1.0])
        b = _trace([3.0, 1.0])
        b.records[0] = TraceRecord(0, 0, 3.0, 6.0, wall_ns=12345, sum_v_sq=1.0, sum_u_sq=1.0)
        assert a.trajectory_equals(b)

    def test_unmeasured_u_is_not_compared(self):
        assert _trace([3.0, 1.0]).trajectory_equals(_trace([3.0, 1.0], sum_u=NAN))

    def test_loss_difference_detected(self):
        assert not _trace([3.0, 1.0]).trajectory_equals(_trace([3.0, 1.0 + 1e-16 * 4]))

    def test_final_x_difference_detected(self):
        assert not _trace([3.0, 1.0]).trajectory_equals(_trace([3.0, 1.0], final_x=(2.0,)))

    def test_record_row_follows_csv_schema(self):
        row = TraceRecord(1, 2, 0.5, 0.25, 7).as_row()
        assert list(row) == ["epoch", "iter", "loss", "grad_norm_sq", "wall_ns", "sum_v_sq", "sum_u_sq"]
