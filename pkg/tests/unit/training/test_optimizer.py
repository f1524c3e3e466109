import numpy as np
import pytest

from advdrop.core.exceptions import ContractError
from advdrop.schemas.training import LRSchedule, TrainConfig
from advdrop.services.autodiff import Parameter
from advdrop.services.training import SGD, SGDState, clip_grad_norm, lr_at, sgd_step


def _config(**overrides):
    values = {"lr": 0.1, "momentum": 0.9, "weight_decay": 0.0}
    values.update(overrides)
    return TrainConfig(**values)


def test_three_step_momentum_unroll():
    w = Parameter(np.array([1.0]))
    state = SGDState.zeros([w])
    cfg = _config()
    expected = [0.95, 0.855, 0.7195]
    for value in expected:
        sgd_step([w], [np.array([0.5])], state, cfg)
        assert w.data[0] == pytest.approx(value)
    assert state.velocity[0][0] == pytest.approx(1.355)


def test_weight_decay_is_coupled_into_gradient():
    w = Parameter(np.array([1.0, -2.0]))
    sgd_step([w], [np.zeros(2)], SGDState.zeros([w]), _config(momentum=0.0, weight_decay=0.5))
    np.testing.assert_allclose(w.data, [0.95, -1.9])


def test_missing_gradient_counts_as_zero():
    w = Parameter(np.array([3.0]))
    sgd_step([w], [None], SGDState.zeros([w]), _config())
    assert w.data[0] == 3.0


def test_masked_entries_stay_zero():
    w = Parameter(np.array([1.0, 1.0, 1.0]))
    w.set_keep_mask(np.array([True, False, True]))
    state = SGDState.zeros([w])
    for _ in range(3):
        sgd_step([w], [np.ones(3)], state, _config(weight_decay=0.1))
    assert w.data[1] == 0.0
    assert state.velocity[0][1] == 0.0
    assert w.data[0] < 1.0


def test_misaligned_state_is_rejected():
    w = Parameter(np.zeros(2))
    with pytest.raises(ContractError):
        sgd_step([w], [np.zeros(2)], SGDState(), _config())


@pytest.mark.parametrize("epoch, expected", [(0, 0.1), (149, 0.1), (150, 0.01), (224, 0.01), (225, 0.001), (299, 0.001)])
def test_step_schedule(epoch, expected):
    cfg = TrainConfig(lr=0.1, lr_schedule=LRSchedule.STEP, milestones=[150, 225], lr_factor=0.1)
    assert lr_at(cfg, epoch) == pytest.approx(expected)


def test_constant_schedule_ignores_milestones():
    assert lr_at(TrainConfig(lr=0.1), 500) == 0.1


def test_milestones_must_increase():
    with pytest.raises(ValueError):
        TrainConfig(milestones=[225, 150])


def test_clip_scales_to_max_norm():
    grads, norm = clip_grad_norm([np.array([3.0]), np.array([4.0])], 1.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_allclose(np.concatenate(grads), [0.6, 0.8])


def test_clip_leaves_small_gradients():
    original = [np.array([0.3, 0.4])]
    grads, norm = clip_grad_norm(original, 1.0)
    assert norm == pytest.approx(0.5)
    assert grads[0] is original[0]


def test_optimizer_step_reports_pre_clip_norm():
    w = Parameter(np.array([0.0, 0.0]))
    w.grad = np.array([3.0, 4.0])
    optimizer = SGD([w], _config(momentum=0.0, grad_clip=1.0))
    assert optimizer.step(0.1) == pytest.approx(5.0)
    np.testing.assert_allclose(w.data, [-0.06, -0.08])
