import itertools

import numpy as np
import pytest
from scipy import special

import advdrop.services.evaluation.uncertainty as uncertainty_module
from advdrop.core.exceptions import ArgumentError, UndefinedMetricError
from advdrop.schemas.model import DropoutPolicy, EvalStatistics, FcSpec
from advdrop.services.data.dataset import Dataset
from advdrop.services.evaluation import auroc, mc_infer, uncertainty_eval
from advdrop.services.network import build


def _pairwise_auroc(scores, labels):
    positives = [s for s, l in zip(scores, labels) if l]
    negatives = [s for s, l in zip(scores, labels) if not l]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(positives, negatives))
    return wins / (len(positives) * len(negatives))


def test_auroc_perfect_separation():
    assert auroc(np.array([0.9, 0.8, 0.2, 0.1]), np.array([1, 1, 0, 0])) == 1.0


def test_auroc_constant_scores_is_half():
    assert auroc(np.full(6, 0.3), np.array([1, 0, 1, 0, 1, 0])) == 0.5


@pytest.mark.parametrize("scores, labels", [
    ([0.9, 0.4, 0.6, 0.1], [1, 0, 1, 0]),
    ([0.2, 0.4, 0.4, 0.8, 0.1], [1, 0, 1, 0, 1]),
    ([0.5, 0.3, 0.7, 0.7, 0.2, 0.9], [0, 1, 1, 0, 0, 1]),
])
def test_auroc_matches_pair_count(scores, labels):
    assert auroc(np.array(scores), np.array(labels)) == pytest.approx(_pairwise_auroc(scores, labels))


@pytest.mark.parametrize("transform", [lambda s: 2.0 * s + 5.0, np.exp, lambda s: s ** 3])
def test_auroc_invariant_under_monotone_transforms(transform):
    gen = np.random.default_rng(7)
    scores = gen.normal(size=200)
    labels = gen.random(200) < special.expit(2.0 * scores)
    assert auroc(transform(scores), labels) == pytest.approx(auroc(scores, labels), abs=1e-12)


def test_auroc_needs_both_classes():
    with pytest.raises(UndefinedMetricError):
        auroc(np.array([0.1, 0.2]), np.array([1, 1]))


def test_single_pass_has_zero_variance(toy_model, gaussians):
    _, test = gaussians
    report = mc_infer(toy_model, test.features, passes=1)
    assert np.all(report.variance == 0.0)
    np.testing.assert_allclose(report.mean.sum(axis=1), 1.0)


def test_deterministic_model_has_zero_variance(plain_spec, gaussians):
    _, test = gaussians
    report = mc_infer(build(plain_spec, np.random.default_rng(0)), test.features, passes=5)
    np.testing.assert_allclose(report.variance, 0.0, atol=1e-15)


def test_stochastic_passes_spread(toy_model, gaussians):
    _, test = gaussians
    report = mc_infer(toy_model, test.features, passes=8, seed=3)
    assert report.variance.mean() > 0.0
    assert report.max_prob.shape == (len(test),)
    assert np.all(report.entropy >= 0.0)
    assert np.all(report.entropy <= np.log(2) + 1e-12)


def test_worker_count_does_not_change_results(toy_model, gaussians):
    _, test = gaussians
    single = mc_infer(toy_model, test.features, passes=6, seed=1, workers=1)
    pooled = mc_infer(toy_model, test.features, passes=6, seed=1, workers=3)
    assert np.array_equal(single.mean, pooled.mean)
    assert np.array_equal(single.variance, pooled.variance)


def test_passes_leave_site_statistics_untouched(toy_model, gaussians):
    _, test = gaussians
    toy_model.refresh_telemetry(test.features)
    before = toy_model.sites[0].last_mu.copy()
    toy_model.eval()
    mc_infer(toy_model, test.features[:5], passes=3)
    np.testing.assert_array_equal(toy_model.sites[0].last_mu, before)
    assert toy_model.mode.value == "eval"
    assert all(site.record_statistics for site in toy_model.advanced_sites)


def test_running_statistics_survive_inference(gaussians):
    _, test = gaussians
    policy = DropoutPolicy(eval_statistics=EvalStatistics.RUNNING)
    model = build(FcSpec(layer_dims=[2, 8, 8, 2], dropout=policy), np.random.default_rng(0))
    model.train()
    model.forward(test.features, rng=np.random.default_rng(1))
    running = [site.running_mu.copy() for site in model.advanced_sites]
    mc_infer(model, test.features * 10.0, passes=4, workers=2)
    for site, expected in zip(model.advanced_sites, running):
        np.testing.assert_array_equal(site.running_mu, expected)


def test_pooled_passes_never_write_site_statistics(mocker, toy_model, gaussians):
    _, test = gaussians
    toy_model.refresh_telemetry(test.features)
    before = [site.last_mu for site in toy_model.advanced_sites]
    original = uncertainty_module._one_pass
    untouched = []

    def recording(model, x, seed_seq, batch_size):
        out = original(model, x, seed_seq, batch_size)
        untouched.append(all(site.last_mu is mu for site, mu in zip(model.advanced_sites, before)))
        return out

    mocker.patch.object(uncertainty_module, "_one_pass", side_effect=recording)
    mc_infer(toy_model, test.features * 3.0, passes=6, workers=3)
    assert untouched == [True] * 6


def test_require_advanced(plain_spec):
    with pytest.raises(ArgumentError):
        mc_infer(build(plain_spec, np.random.default_rng(0)), np.zeros((2, 2)), 2, require_advanced=True)
    with pytest.raises(ArgumentError):
        mc_infer(build(plain_spec, np.random.default_rng(0)), np.zeros((2, 2)), 0)


def test_uncertainty_eval_forwards_require_advanced(plain_spec, gaussians):
    _, test = gaussians
    with pytest.raises(ArgumentError):
        uncertainty_eval(build(plain_spec, np.random.default_rng(0)), test, passes=2, require_advanced=True)


def test_uncertainty_eval_classification(toy_model, gaussians):
    _, test = gaussians
    summary, report = uncertainty_eval(toy_model, test, passes=4)
    assert summary.passes == 4
    assert 0.0 <= summary.accuracy <= 1.0
    assert np.sum(summary.confusion) == len(test)
    if summary.auroc_maxP is not None:
        assert 0.0 <= summary.auroc_maxP <= 1.0


def test_uncertainty_eval_single_class_correctness(plain_spec):
    model = build(plain_spec, np.random.default_rng(0))
    x = np.zeros((4, 2))
    predicted = int(mc_infer(model, x, 1).predictions[0])
    labels = np.full(4, predicted, dtype=np.int64)
    summary, _ = uncertainty_eval(model, Dataset(x, labels), passes=2)
    assert summary.accuracy == 1.0
    assert summary.auroc_maxP is None
    assert summary.auroc_entropy is None


def test_uncertainty_eval_regression(regression_spec, regression_data):
    _, test = regression_data
    summary, report = uncertainty_eval(build(regression_spec, np.random.default_rng(0)), test, passes=3)
    assert summary.rmse > 0.0
    assert summary.auroc_maxP is None
    assert report.max_prob is None
