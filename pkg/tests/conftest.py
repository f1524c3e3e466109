import numpy as np
import pytest

from advdrop.schemas.model import DropoutKind, DropoutPolicy, FcSpec, PriorMode, Task
from advdrop.schemas.training import LossKind, TrainConfig
from advdrop.services.data.splits import split
from advdrop.services.data.synthetic import SyntheticKind, synthetic
from advdrop.services.event_bus.bus import EventBus
from advdrop.services.network import build


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def event_bus():
    """A private bus so tests never see each other's subscribers."""
    return EventBus()


@pytest.fixture
def gaussians():
    return split(synthetic(SyntheticKind.TWO_GAUSSIANS, 200, seed=0), 0.8, seed=0)


@pytest.fixture
def regression_data():
    return split(synthetic(SyntheticKind.LINEAR_REGRESSION, 100, seed=0), 0.8, seed=0)


@pytest.fixture
def toy_spec():
    return FcSpec(layer_dims=[2, 8, 8, 2], dropout=DropoutPolicy(kind=DropoutKind.ADVANCED))


@pytest.fixture
def toy_model(toy_spec):
    return build(toy_spec, np.random.default_rng(0))


@pytest.fixture
def plain_spec():
    return FcSpec(layer_dims=[2, 8, 2], dropout=DropoutPolicy(kind=DropoutKind.NONE))


@pytest.fixture
def fixed_policy():
    return DropoutPolicy(kind=DropoutKind.ADVANCED, prior_mode=PriorMode.FIXED)


@pytest.fixture
def quick_config():
    return TrainConfig(epochs=2, batch_size=20, lr=0.05, seed=0, eval_batch_size=50)


@pytest.fixture
def regression_spec():
    return FcSpec(layer_dims=[3, 8, 1], task=Task.REGRESSION)


@pytest.fixture
def regression_config():
    return TrainConfig(epochs=2, batch_size=20, lr=0.01, seed=0, loss=LossKind.MSE, eval_batch_size=50)


@pytest.fixture
def outdir(tmp_path):
    return tmp_path / "runs"
