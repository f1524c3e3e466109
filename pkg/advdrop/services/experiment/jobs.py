"""
Per-seed jobs that start from a checkpoint or run a pruning cycle.
"""
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from advdrop.schemas.model import Task
from advdrop.services.evaluation import (
    accuracy,
    confusion_matrix,
    normalize_rows,
    rmse,
    top_k_accuracy,
    uncertainty_eval,
)
from advdrop.services.experiment.artifacts import write_csv, write_json
from advdrop.services.experiment.runner import SeedOutcome, base_summary, prepare, run_dir
from advdrop.services.metrics.collector import MetricsCollector
from advdrop.services.network import load_checkpoint
from advdrop.services.pruning import lottery_cycle
from advdrop.services.training import predict

logger = logging.getLogger("advdrop.experiment")


def _confusion_rows(counts: np.ndarray):
    normalized = normalize_rows(counts)
    return [[true, pred, int(counts[true, pred]), float(normalized[true, pred])]
            for true in range(counts.shape[0]) for pred in range(counts.shape[1])]


def _load(cfg, seed: int, checkpoint: Optional[str]):
    path = Path(checkpoint) if checkpoint else run_dir(cfg, seed) / "checkpoint.npz"
    model, _ = load_checkpoint(path, expected_hash=cfg.config_hash)
    return model


def evaluate_seed(cfg, seed: int, checkpoint: Optional[str] = None) -> SeedOutcome:
    """Eval-mode metrics of a stored model on the test split; writes eval.json (and confusion.csv)."""
    model = _load(cfg, seed, checkpoint)
    _, _, test = prepare(cfg, seed)
    directory = run_dir(cfg, seed)
    outputs = predict(model, test.features, batch_size=cfg.training.eval_batch_size)

    if test.task is Task.REGRESSION:
        final = {"test_rmse": rmse(outputs, test.targets)}
        metric = "rmse"
    else:
        predictions = np.argmax(outputs, axis=1)
        final = {
            "test_accuracy": accuracy(predictions, test.targets),
            "test_top5_accuracy": top_k_accuracy(outputs, test.targets, k=5),
        }
        metric = "accuracy"
        counts = confusion_matrix(test.targets, predictions, n_classes=outputs.shape[1])
        write_csv(directory / "confusion.csv", ["true", "predicted", "count", "row_fraction"],
                  _confusion_rows(counts))
    write_json(directory / "eval.json", {**base_summary(cfg, seed), "metric": metric, "final": final})
    return SeedOutcome(seed=seed, metric=metric, final=final, run_dir=str(directory))


def uncertainty_seed(cfg, seed: int, checkpoint: Optional[str] = None, threads: int = 1) -> SeedOutcome:
    """MC inference with T passes; writes uncertainty.json and, for classifiers, confusion.csv."""
    model = _load(cfg, seed, checkpoint)
    _, _, test = prepare(cfg, seed)
    directory = run_dir(cfg, seed)
    summary, report = uncertainty_eval(
        model, test, cfg.uncertainty.passes, seed=seed, workers=threads,
        batch_size=cfg.training.eval_batch_size, require_advanced=True,
    )
    payload = {**base_summary(cfg, seed), "summary": summary.model_dump()}
    if cfg.uncertainty.save_samples:
        payload["samples"] = {"mean": report.mean.tolist(), "variance": report.variance.tolist()}
    write_json(directory / "uncertainty.json", payload)
    if summary.confusion:
        write_csv(directory / "confusion.csv", ["true", "predicted", "count", "row_fraction"],
                  _confusion_rows(np.asarray(summary.confusion)))

    final = {key: value for key, value in summary.model_dump(
        include={"auroc_maxP", "auroc_entropy", "accuracy", "rmse", "mean_variance"}).items()
        if value is not None}
    metric = "rmse" if test.task is Task.REGRESSION else "accuracy"
    return SeedOutcome(seed=seed, metric=metric, final=final, run_dir=str(directory))


def prune_seed(cfg, seed: int) -> SeedOutcome:
    """Lottery-style cycles for every configured selection method; writes prune.csv."""
    spec, train, test = prepare(cfg, seed)
    directory = run_dir(cfg, seed)
    pruning = cfg.pruning
    final = {}
    results = []
    with MetricsCollector(directory, cfg.config_hash, seed, epochs=False, prune=True):
        for method in pruning.methods:
            for result in lottery_cycle(
                spec, train, test, cfg.train_config(seed), pruning.rounds, pruning.q,
                pruning.granularity, method, config_hash=cfg.config_hash,
            ):
                results.append(result.model_dump(mode="json"))
                final[f"{method.value}:{result.round}"] = result.accuracy
    write_json(directory / "prune_summary.json", {
        **base_summary(cfg, seed), "pruning": pruning.model_dump(mode="json"), "rounds": results,
    })
    metric = "rmse" if spec.task is Task.REGRESSION else "accuracy"
    return SeedOutcome(seed=seed, metric=metric, final=final, run_dir=str(directory))
