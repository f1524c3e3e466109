import csv
import json

import pytest

from advdrop.main import main

QUICK = ["--dataset", "two_gaussians", "--train-size", "100", "--epochs", "2", "--batch-size", "20"]


def _hash_dir(outdir):
    dirs = [d for d in outdir.iterdir() if d.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


@pytest.fixture
def trained(outdir):
    assert main(["train", *QUICK, "--seeds", "0,1", "--outdir", str(outdir)]) == 0
    return _hash_dir(outdir)


def test_train_writes_run_layout(trained):
    for seed in ("0", "1"):
        run = trained / seed
        for name in ("metrics.jsonl", "rates.csv", "checkpoint.npz", "summary.json", "timing.log"):
            assert (run / name).is_file(), name
        assert len((run / "metrics.jsonl").read_text().splitlines()) == 2
    summary = json.loads((trained / "summary.json").read_text())
    assert summary["seeds"] == [0, 1]
    assert len(summary["final"]["test_accuracy"]["values"]) == 2
    seed_summary = json.loads((trained / "0" / "summary.json").read_text())
    assert seed_summary["config_hash"] == trained.name


def test_training_is_reproducible(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["train", *QUICK, "--outdir", str(first)]) == 0
    assert main(["train", *QUICK, "--outdir", str(second)]) == 0
    a, b = _hash_dir(first), _hash_dir(second)
    assert a.name == b.name
    for name in ("metrics.jsonl", "rates.csv", "checkpoint.npz"):
        assert (a / "0" / name).read_bytes() == (b / "0" / name).read_bytes()


def test_eval_from_checkpoint(trained, outdir):
    assert main(["eval", *QUICK, "--seeds", "0,1", "--outdir", str(outdir)]) == 0
    result = json.loads((trained / "0" / "eval.json").read_text())
    assert 0.0 <= result["final"]["test_accuracy"] <= 1.0
    with open(trained / "0" / "confusion.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["true", "predicted", "count", "row_fraction"]
    assert len(rows) == 1 + 4
    assert (trained / "eval_summary.json").is_file()


def test_uncertainty_from_checkpoint(trained, outdir):
    assert main(["uncertainty", *QUICK, "--seeds", "0", "--T", "5", "--save-samples",
                 "--outdir", str(outdir)]) == 0
    payload = json.loads((trained / "0" / "uncertainty.json").read_text())
    assert payload["summary"]["passes"] == 5
    assert len(payload["samples"]["mean"]) == 20
    assert (trained / "uncertainty_summary.json").is_file()


def test_uncertainty_needs_advanced_dropout(outdir, capsys):
    args = [*QUICK, "--dropout", "none", "--seeds", "0", "--outdir", str(outdir)]
    assert main(["train", *args]) == 0
    assert main(["uncertainty", *args, "--T", "3"]) == 1
    lines = [l for l in capsys.readouterr().err.splitlines() if l.startswith("{\"status\"")]
    assert json.loads(lines[-1])["code"] == "ARGUMENT_ERROR"


def test_checkpoint_from_other_config_exits_4(trained, outdir):
    checkpoint = trained / "0" / "checkpoint.npz"
    code = main(["eval", *QUICK[:-4], "--epochs", "3", "--batch-size", "20",
                 "--checkpoint", str(checkpoint), "--outdir", str(outdir)])
    assert code == 4


def test_missing_data_exits_2(tmp_path, outdir):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["train", "--dataset", "mnist", "--data-path", str(empty), "--outdir", str(outdir)]) == 2


def test_unknown_dataset_exits_1(outdir):
    assert main(["train", "--dataset", "cifar", "--outdir", str(outdir)]) == 1


def test_bad_flag_value_is_a_usage_error(outdir):
    assert main(["train", "--dropout", "sometimes", "--outdir", str(outdir)]) == 2


def test_regression_run(outdir):
    assert main(["train", "--dataset", "linear_regression", "--train-size", "60", "--epochs", "2",
                 "--lr", "0.01", "--outdir", str(outdir)]) == 0
    summary = json.loads((_hash_dir(outdir) / "summary.json").read_text())
    assert summary["metric"] == "rmse"
    assert summary["final"]["test_rmse"]["mean"] > 0.0


def test_prune_cycle(outdir):
    code = main(["prune", "--dataset", "two_gaussians", "--train-size", "100", "--epochs", "1",
                 "--rounds", "2", "--q", "25", "--outdir", str(outdir)])
    assert code == 0
    run = _hash_dir(outdir) / "0"
    with open(run / "prune.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert [int(r["round"]) for r in rows] == [0, 1, 2]
    assert float(rows[0]["kept_fraction"]) == 1.0
    assert float(rows[2]["kept_fraction"]) < float(rows[1]["kept_fraction"]) < 1.0
    assert (run / "prune_summary.json").is_file()


def test_distcheck_outputs(outdir):
    code = main(["distcheck", "--outdir", str(outdir)])
    assert code == 1
    target = outdir / "distcheck"
    assert len(list(target.glob("pdf_*.csv"))) == 5
    with open(target / "kl_table.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4
    flagged = {(float(r["k"]), float(r["theta"])) for r in rows if r["flag"]}
    assert flagged == {(2.0, 0.5), (0.5, 3.0)}
    payload = json.loads((target / "distcheck.json").read_text())
    assert payload["passed"] is False
    assert all(r["softplus_gaussian_wins"] == "False" for r in rows)
    assert all(v == pytest.approx(1.0, abs=1e-6) for v in payload["normalization_seed"].values())


def test_version():
    assert main(["--version"]) == 0


def test_unexpected_failure_exits_1(mocker, outdir, capsys):
    mocker.patch("advdrop.services.experiment.runner.fit", side_effect=RuntimeError("boom"))
    assert main(["train", *QUICK, "--outdir", str(outdir)]) == 1
    lines = [l for l in capsys.readouterr().err.splitlines() if l.startswith("{\"status\"")]
    body = json.loads(lines[0])
    assert body["code"] == "INTERNAL_ERROR"
    assert body["message"] == "boom"
