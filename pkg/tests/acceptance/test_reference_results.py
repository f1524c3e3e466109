"""
Long-running checks against reference results. Deselected by default;
run with `pytest -m slow` or `pytest -m published`.
"""
import json

import numpy as np
import pytest

from advdrop.main import main
from advdrop.schemas.model import DropoutPolicy, FcSpec
from advdrop.schemas.training import TrainConfig
from advdrop.services.data import split, synthetic
from advdrop.services.evaluation import uncertainty_eval
from advdrop.services.network import build
from advdrop.services.training import fit


@pytest.mark.slow
def test_advanced_dropout_separates_gaussians(event_bus):
    train, test = split(synthetic("two_gaussians", 2000, seed=0), 0.8, seed=0)
    model = build(FcSpec(layer_dims=[2, 32, 32, 2], dropout=DropoutPolicy()), np.random.default_rng(0))
    record = fit(model, train, test, TrainConfig(epochs=20, batch_size=50, lr=0.05), bus=event_bus)
    assert record.final["test_accuracy"] >= 0.97
    rates = [site.rate for site in record.rows[-1].sites]
    assert all(0.0 < rate < 1.0 for rate in rates)


@pytest.mark.slow
def test_confidence_ranks_correct_predictions_higher(event_bus):
    train, test = split(synthetic("two_gaussians", 2000, seed=1), 0.8, seed=1)
    model = build(FcSpec(layer_dims=[2, 32, 2]), np.random.default_rng(1))
    fit(model, train, test, TrainConfig(epochs=10, batch_size=50, lr=0.05), bus=event_bus)
    summary, _ = uncertainty_eval(model, test, passes=50, seed=1)
    assert summary.auroc_maxP is not None and summary.auroc_maxP > 0.5


@pytest.mark.published
def test_mnist_fully_connected(tmp_path):
    """Needs MNIST under ADVDROP_DATA_DIR; see scripts/download_data.py."""
    code = main(["train", "--dataset", "mnist", "--epochs", "200", "--lr", "0.01", "--outdir", str(tmp_path)])
    assert code == 0
    run = next(d for d in tmp_path.iterdir() if d.is_dir())
    summary = json.loads((run / "summary.json").read_text())
    assert summary["final"]["test_accuracy"]["mean"] >= 0.984
