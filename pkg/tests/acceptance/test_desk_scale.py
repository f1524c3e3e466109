"""
Desk-scale versions of the headline claims, on the real datasets.

Marked slow. Each test skips when its data is not under ADVDROP_DATA_DIR;
fetch it with scripts/download_data.py.
"""
import csv
import json

import numpy as np
import pytest

from advdrop.core.exceptions import MissingDataError
from advdrop.main import main
from advdrop.schemas.experiment import DatasetConfig
from advdrop.services.data import load_dataset
from advdrop.services.distributions import dropout_rate

pytestmark = pytest.mark.slow

MNIST_DESK = ["--dataset", "mnist", "--train-size", "10000"]
UCI = ["boston", "concrete", "wine-red", "yacht"]
BASELINES = ["none", "bernoulli", "gaussian"]

INIT_SIGMA = 4.0
# Seed means for initial rates 0.6, 0.5, 0.25 and 0.05.
INIT_MUS = [-1.0, 0.0, 3.0, 7.95]


def _require(*names):
    for name in names:
        try:
            load_dataset(DatasetConfig(name=name, train_size=10, test_size=10), seed=0)
        except MissingDataError:
            pytest.skip(f"{name} is not downloaded")


def _hash_dir(root):
    (run,) = [d for d in root.iterdir() if d.is_dir()]
    return run


def _final(root, name="summary.json"):
    return json.loads((_hash_dir(root) / name).read_text())["final"]


def _train(root, *args):
    assert main(["train", *args, "--outdir", str(root)]) == 0
    return _final(root)


def _last_epoch_rates(root, seed=0):
    with open(_hash_dir(root) / str(seed) / "rates.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    last = max(int(r["epoch"]) for r in rows)
    return {int(r["site"]): float(r["rate"]) for r in rows if int(r["epoch"]) == last}


def test_advanced_dropout_beats_no_dropout_on_mnist_subset(tmp_path):
    _require("mnist")
    common = [*MNIST_DESK, "--epochs", "30", "--seeds", "0,1,2"]
    advanced = _train(tmp_path / "advanced", *common, "--dropout", "advanced")
    plain = _train(tmp_path / "none", *common, "--dropout", "none")
    assert advanced["test_accuracy"]["mean"] >= plain["test_accuracy"]["mean"] + 0.002


def test_rates_converge_from_every_initial_rate(tmp_path):
    _require("mnist")
    np.testing.assert_allclose(dropout_rate(np.array(INIT_MUS), INIT_SIGMA), [0.6, 0.5, 0.25, 0.05], atol=0.01)
    finals = []
    for mu in INIT_MUS:
        root = tmp_path / f"mu{mu:g}"
        _train(root, *MNIST_DESK, "--epochs", "50", "--seeds", "0",
               "--init-mu", str(mu), "--init-sigma", str(INIT_SIGMA))
        finals.append(_last_epoch_rates(root))

    for site in finals[0]:
        rates = [final[site] for final in finals]
        assert max(rates) - min(rates) <= 0.1, site
    last_site = max(finals[0])
    assert all(0.0 <= final[last_site] <= 0.2 for final in finals)


def test_advanced_dropout_has_lowest_uci_rmse(tmp_path):
    _require(*UCI)
    wins = 0
    for name in UCI:
        common = ["--dataset", name, "--hidden", "50,50", "--epochs", "50", "--seeds", "0,1,2,3,4"]
        rmse = {
            kind: _train(tmp_path / name / kind, *common, "--dropout", kind)["test_rmse"]["mean"]
            for kind in ["advanced", *BASELINES]
        }
        wins += rmse["advanced"] <= min(rmse[kind] for kind in BASELINES)
    assert wins >= 3


def test_mc_confidence_detects_correct_predictions(tmp_path):
    _require("mnist")
    args = [*MNIST_DESK, "--epochs", "30", "--seeds", "0", "--outdir", str(tmp_path)]
    assert main(["train", *args]) == 0
    assert main(["uncertainty", *args, "--T", "50"]) == 0
    final = _final(tmp_path, "uncertainty_summary.json")
    assert final["auroc_maxP"]["mean"] > 0.9
    assert final["auroc_entropy"]["mean"] > 0.85


def test_rate_pruning_keeps_up_with_random(tmp_path):
    _require("mnist")
    code = main(["prune", *MNIST_DESK, "--epochs", "10", "--seeds", "0,1,2",
                 "--granularity", "node", "--q", "10", "--rounds", "6",
                 "--method", "rate", "--method", "random", "--outdir", str(tmp_path)])
    assert code == 0
    final = _final(tmp_path, "prune_summary.json")
    levels = range(1, 7)
    better = sum(final[f"rate:{r}"]["mean"] >= final[f"random:{r}"]["mean"] for r in levels)
    assert better >= 4
