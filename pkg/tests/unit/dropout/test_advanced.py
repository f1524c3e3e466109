import numpy as np
import pytest

from advdrop.core.exceptions import ArgumentError, DimensionError, EmptyBatchError, TelemetryStateError
from advdrop.schemas.model import DropoutPolicy, EvalStatistics, PriorMode
from advdrop.services.autodiff import Parameter, Tensor, reduce_sum
from advdrop.services.autodiff.gradcheck import check_gradients
from advdrop.services.distributions import mean_mask, softplus_inverse
from advdrop.services.dropout import AdvancedDropoutLayer, Mode, dropout_rate, parse_mode, prior_params


def _zeroed(layer: AdvancedDropoutLayer) -> AdvancedDropoutLayer:
    """Encoder weights at zero so mu and sigma equal the output biases."""
    for p in (layer.W_h, layer.W_mu, layer.W_sigma):
        p.assign(np.zeros(p.shape))
    return layer


def _fixed(k: int, mu: float, sigma: float) -> AdvancedDropoutLayer:
    return AdvancedDropoutLayer(k, DropoutPolicy(prior_mode=PriorMode.FIXED, init_mu=mu, init_sigma=sigma))


def test_zero_encoder_yields_bias_values():
    layer = _zeroed(AdvancedDropoutLayer(4, DropoutPolicy(init_mu=0.0, init_sigma=3.0)))
    mu, sigma = prior_params(layer, Tensor(np.random.default_rng(0).standard_normal((5, 4))))
    np.testing.assert_allclose(mu.data, np.zeros(4), atol=1e-12)
    np.testing.assert_allclose(sigma.data, np.full(4, 3.0), atol=1e-9)
    assert layer.b_sigma.data[0] == pytest.approx(softplus_inverse(3.0))


def test_identical_samples_give_single_sample_prior():
    layer = AdvancedDropoutLayer(3, rng=np.random.default_rng(1))
    row = np.random.default_rng(2).standard_normal((1, 3))
    single_mu, single_sigma = layer.prior_params(Tensor(row))
    batch_mu, batch_sigma = layer.prior_params(Tensor(np.repeat(row, 6, axis=0)))
    np.testing.assert_allclose(batch_mu.data, single_mu.data, rtol=1e-12)
    np.testing.assert_allclose(batch_sigma.data, single_sigma.data, rtol=1e-12)


def test_prior_needs_non_empty_batch():
    layer = AdvancedDropoutLayer(3)
    with pytest.raises(EmptyBatchError):
        layer.prior_params(Tensor(np.zeros((0, 3))))


def test_prior_gradient_with_respect_to_encoder():
    gen = np.random.default_rng(3)
    layer = AdvancedDropoutLayer(3, DropoutPolicy(hidden_dim=2), rng=gen)
    for p in layer.parameters():
        p.assign(gen.standard_normal(p.shape) * 0.5)
    x = Tensor(gen.standard_normal((4, 3)))
    weights = Tensor(gen.standard_normal(3))

    def loss():
        mu, sigma = layer.prior_params(x)
        return reduce_sum(mu * weights) + reduce_sum(sigma)

    errors = check_gradients(loss, [layer.W_h, layer.b_h, layer.W_mu, layer.W_sigma])
    assert max(errors.values()) <= 1e-5


def test_eval_with_symmetric_prior_halves_output():
    layer = _fixed(4, 0.0, 3.0)
    layer.eval()
    pre = Tensor(np.arange(8.0).reshape(2, 4))
    out = layer.forward(pre, np.random.default_rng(0))
    np.testing.assert_allclose(out.data, 0.5 * pre.data)


def test_eval_is_sampling_free_and_idempotent():
    layer = AdvancedDropoutLayer(3, rng=np.random.default_rng(0))
    layer.eval()
    pre = Tensor(np.random.default_rng(1).standard_normal((4, 3)))
    first = layer.forward(pre, np.random.default_rng(2)).data
    second = layer.forward(pre, np.random.default_rng(99)).data
    assert np.array_equal(first, second)


def test_saturated_train_mask_passes_input():
    layer = _fixed(3, 20.0, 1e-9)
    pre = Tensor(np.ones((2, 3)))
    out = layer.forward(pre, np.random.default_rng(0))
    np.testing.assert_allclose(out.data, pre.data, atol=1e-8)


def test_train_masks_average_to_mean_mask():
    layer = _fixed(2, 0.5, 1.5)
    pre = Tensor(np.ones((100_000, 2)))
    out = layer.forward(pre, np.random.default_rng(4))
    np.testing.assert_allclose(out.data.mean(axis=0), mean_mask(0.5, 1.5), atol=0.02)


def test_train_average_matches_eval_output():
    layer = _fixed(3, -0.5, 2.0)
    pre = Tensor(np.full((100_000, 3), 2.0))
    train_mean = layer.forward(pre, np.random.default_rng(5)).data.mean(axis=0)
    layer.eval()
    eval_out = layer.forward(Tensor(np.full((1, 3), 2.0)), np.random.default_rng(5)).data[0]
    np.testing.assert_allclose(train_mean, eval_out, rtol=0.03)


def test_reparameterized_gradients_with_frozen_noise():
    gen = np.random.default_rng(6)
    layer = AdvancedDropoutLayer(3, DropoutPolicy(prior_mode=PriorMode.FREE, init_mu=0.3, init_sigma=1.2))
    pre = Tensor(gen.standard_normal((5, 3)))
    noise = gen.standard_normal((5, 3))
    weights = Tensor(gen.standard_normal((5, 3)))
    errors = check_gradients(
        lambda: reduce_sum(layer.forward(pre, None, noise=noise) * weights),
        [layer.mu_free, layer.rho_free],
    )
    assert max(errors.values()) <= 1e-4


def test_free_prior_receives_gradient():
    layer = AdvancedDropoutLayer(2, DropoutPolicy(prior_mode=PriorMode.FREE))
    pre = Parameter(np.ones((3, 2)))
    reduce_sum(layer.forward(pre, np.random.default_rng(0))).backward()
    assert layer.mu_free.grad is not None
    assert np.any(layer.mu_free.grad != 0)


def test_forward_rejects_wrong_width():
    layer = AdvancedDropoutLayer(3)
    with pytest.raises(DimensionError):
        layer.forward(Tensor(np.ones((2, 4))), np.random.default_rng(0))


def test_rate_requires_telemetry():
    with pytest.raises(TelemetryStateError):
        dropout_rate(AdvancedDropoutLayer(3))


@pytest.mark.parametrize("mu, expected", [(0.0, 0.5), (10.0, 0.025), (-1.0, 0.6)])
def test_layer_rate_from_seed_parameters(mu, expected):
    layer = _fixed(5, mu, 4.0 if mu else 3.0)
    layer.prior_params(Tensor(np.zeros((1, 5))))
    per_node, rate = layer.dropout_rate()
    assert per_node.shape == (5,)
    assert rate == pytest.approx(expected, abs=0.01)
    assert 0.0 < rate < 1.0


def test_layer_scalar_prior():
    layer = AdvancedDropoutLayer(4, DropoutPolicy(prior_mode=PriorMode.FREE, per_node=False))
    mu, sigma = layer.prior_params(Tensor(np.zeros((2, 4))))
    assert mu.ndim == 0 and sigma.ndim == 0
    assert layer.last_mu.shape == (4,)


def test_running_statistics_drive_eval():
    layer = _fixed(2, 1.0, 2.0)
    layer.policy = layer.policy.model_copy(update={"eval_statistics": EvalStatistics.RUNNING})
    layer.forward(Tensor(np.ones((3, 2))), np.random.default_rng(0))
    np.testing.assert_allclose(layer.running_mu, [1.0, 1.0])
    layer.eval()
    out = layer.forward(Tensor(np.ones((1, 2))), np.random.default_rng(0))
    np.testing.assert_allclose(out.data[0], mean_mask(np.ones(2), np.full(2, 2.0)))


def test_telemetry_row():
    layer = _fixed(3, 0.0, 3.0)
    layer.prior_params(Tensor(np.zeros((1, 3))))
    row = layer.telemetry()
    assert row["kind"] == "advanced"
    assert row["rate"] == pytest.approx(0.5)
    assert row["mu_mean"] == 0.0
    assert row["sigma_mean"] == pytest.approx(3.0)


def test_mode_parsing():
    assert parse_mode("eval") is Mode.EVAL
    with pytest.raises(ArgumentError):
        parse_mode("predict")
