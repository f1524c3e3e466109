import numpy as np
import pytest

from advdrop.schemas.model import DropoutKind, DropoutPolicy
from advdrop.services.autodiff import Tensor
from advdrop.services.dropout import BaselineDropout, baseline_forward, build_site
from advdrop.services.dropout.advanced import AdvancedDropoutLayer


@pytest.fixture
def pre():
    return Tensor(np.random.default_rng(0).standard_normal((4, 3)))


@pytest.mark.parametrize("mode", ["train", "eval"])
def test_none_is_identity(pre, mode):
    site = BaselineDropout(3, DropoutPolicy(kind=DropoutKind.NONE))
    site.set_mode(mode)
    assert baseline_forward(site, pre, np.random.default_rng(1)) is pre


def test_bernoulli_eval_scales_by_keep_probability(pre):
    site = BaselineDropout(3, DropoutPolicy(kind=DropoutKind.BERNOULLI, p=0.5))
    site.eval()
    np.testing.assert_allclose(site.forward(pre, None).data, 0.5 * pre.data)


def test_bernoulli_train_zeroes_half():
    site = BaselineDropout(1000, DropoutPolicy(kind=DropoutKind.BERNOULLI, p=0.5))
    out = site.forward(Tensor(np.ones((1000, 1000))), np.random.default_rng(2))
    assert np.mean(out.data == 0.0) == pytest.approx(0.5, abs=0.002)
    assert set(np.unique(out.data)) <= {0.0, 1.0}


def test_gaussian_noise_has_unit_mean_and_identity_eval(pre):
    site = BaselineDropout(500, DropoutPolicy(kind=DropoutKind.GAUSSIAN, variance=0.25))
    out = site.forward(Tensor(np.ones((400, 500))), np.random.default_rng(3))
    assert out.data.mean() == pytest.approx(1.0, abs=0.005)
    assert out.data.var() == pytest.approx(0.25, rel=0.02)
    site.eval()
    ones = Tensor(np.ones((2, 500)))
    assert site.forward(ones, None) is ones


def test_baseline_rates():
    bernoulli = BaselineDropout(4, DropoutPolicy(kind=DropoutKind.BERNOULLI, p=0.8))
    per_node, rate = bernoulli.dropout_rate()
    assert rate == pytest.approx(0.2)
    np.testing.assert_allclose(per_node, np.full(4, 0.2))
    assert BaselineDropout(4, DropoutPolicy(kind=DropoutKind.NONE)).dropout_rate()[1] == 0.0


def test_build_site_dispatches_on_kind():
    rng = np.random.default_rng(0)
    assert isinstance(build_site(DropoutPolicy(), 3, rng, site=0), AdvancedDropoutLayer)
    assert isinstance(build_site(DropoutPolicy(kind=DropoutKind.GAUSSIAN), 3, rng, site=1), BaselineDropout)
