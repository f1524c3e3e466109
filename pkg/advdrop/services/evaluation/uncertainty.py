"""
Monte Carlo uncertainty inference and correctness-detection AUROC.

T train-mode passes sample fresh masks; the predictive mean and the
per-class variance (divided by T) are moment-matched from them. Max
probability and natural-log entropy are computed on the mean vector.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import special, stats

from advdrop.core.exceptions import ArgumentError, UndefinedMetricError
from advdrop.schemas.model import Task
from advdrop.services.autodiff import no_grad
from advdrop.services.data.dataset import Dataset
from advdrop.services.dropout import Mode
from advdrop.services.evaluation.metrics import accuracy, confusion_matrix, normalize_rows, rmse
from advdrop.utils.ids import Stream

logger = logging.getLogger("advdrop.evaluation")


class UncertaintyReport(BaseModel):
    """Per-sample MC moments and confidence scores."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mean: np.ndarray = Field(..., description="N×C predictive mean")
    variance: np.ndarray = Field(..., description="N×C predictive variance")
    max_prob: Optional[np.ndarray] = Field(None, description="Max of the mean vector; None for regression")
    entropy: Optional[np.ndarray] = Field(None, description="Entropy of the mean vector in nats")
    passes: int

    @property
    def predictions(self) -> np.ndarray:
        return np.argmax(self.mean, axis=1)


class UncertaintySummary(BaseModel):
    """Correctness-detection results for one labeled set."""
    auroc_maxP: Optional[float] = None
    auroc_entropy: Optional[float] = None
    accuracy: Optional[float] = None
    rmse: Optional[float] = None
    mean_variance: float
    passes: int
    confusion: List[List[int]] = Field(default_factory=list)
    confusion_normalized: List[List[float]] = Field(default_factory=list)


def _softmax(logits: np.ndarray) -> np.ndarray:
    return special.softmax(logits, axis=1)


def _one_pass(model, x: np.ndarray, seed_seq: np.random.SeedSequence, batch_size: int) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    chunks = []
    with no_grad():
        for start in range(0, len(x), batch_size):
            chunks.append(model.forward(x[start:start + batch_size], rng=rng).numpy())
    outputs = np.concatenate(chunks, axis=0)
    return _softmax(outputs) if model.spec.task is Task.CLASSIFICATION else outputs


def mc_infer(
    model,
    x: np.ndarray,
    passes: int,
    seed: int = 0,
    workers: int = 1,
    batch_size: int = 1000,
    require_advanced: bool = False,
) -> UncertaintyReport:
    """
    Moment-match T stochastic forward passes.

    Every pass owns a generator spawned from the MC stream of `seed`, and the
    reduction runs in pass order, so any worker count gives the same bits.
    Passes run with site statistics frozen, so concurrent passes never write
    shared per-site state and the running averages stay as trained.

    Args:
        model: Trained network
        x: N×D inputs
        passes: Number of passes T
        seed: Report seed
        workers: Threads used for the passes
        batch_size: Rows per forward call
        require_advanced: Reject models without an advanced-dropout site

    Returns:
        UncertaintyReport: Means, variances and (for classifiers) scores
    """
    if passes < 1:
        raise ArgumentError(f"Need at least one pass, got {passes}")
    if require_advanced and not model.advanced_sites:
        raise ArgumentError("Model has no advanced-dropout site")

    previous = model.mode
    model.set_mode(Mode.TRAIN)
    children = np.random.SeedSequence(seed, spawn_key=(int(Stream.MC),)).spawn(passes)
    try:
        with model.frozen_statistics():
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    samples = list(pool.map(lambda s: _one_pass(model, x, s, batch_size), children))
            else:
                samples = [_one_pass(model, x, s, batch_size) for s in children]
    finally:
        model.set_mode(previous)

    stacked = np.stack(samples, axis=0)
    mean = stacked.mean(axis=0)
    variance = np.mean((stacked - mean) ** 2, axis=0)
    if model.spec.task is Task.REGRESSION:
        return UncertaintyReport(mean=mean, variance=variance, passes=passes)
    return UncertaintyReport(
        mean=mean,
        variance=variance,
        max_prob=mean.max(axis=1),
        entropy=special.entr(mean).sum(axis=1),
        passes=passes,
    )


def auroc(scores: np.ndarray, labels: np.ndarray) -> float:
    """
    Probability that a random positive outranks a random negative, ties
    counted one half.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).astype(bool).reshape(-1)
    if scores.shape != labels.shape:
        raise ArgumentError(f"Scores {scores.shape} and labels {labels.shape} disagree")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs both classes", details={"positives": n_pos, "negatives": n_neg})
    ranks = stats.rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def uncertainty_eval(
    model,
    test: Dataset,
    passes: int,
    seed: int = 0,
    workers: int = 1,
    batch_size: int = 1000,
    require_advanced: bool = False,
) -> tuple:
    """
    Correctness detection on labeled data.

    Positive label = prediction correct. Entropy is negated before ranking
    so a higher score always means "more likely correct".

    Returns:
        Tuple[UncertaintySummary, UncertaintyReport]
    """
    report = mc_infer(
        model,
        test.features,
        passes,
        seed=seed,
        workers=workers,
        batch_size=batch_size,
        require_advanced=require_advanced,
    )
    if test.task is Task.REGRESSION:
        summary = UncertaintySummary(
            rmse=rmse(report.mean, test.targets),
            mean_variance=float(report.variance.mean()),
            passes=passes,
        )
        return summary, report

    predictions = report.predictions
    correct = predictions == test.targets
    counts = confusion_matrix(test.targets, predictions, n_classes=report.mean.shape[1])
    try:
        auroc_max_prob = auroc(report.max_prob, correct)
        auroc_entropy = auroc(-report.entropy, correct)
    except UndefinedMetricError as e:
        logger.warning(f"AUROC undefined on this set: {e}")
        auroc_max_prob = auroc_entropy = None
    summary = UncertaintySummary(
        auroc_maxP=auroc_max_prob,
        auroc_entropy=auroc_entropy,
        accuracy=accuracy(predictions, test.targets),
        mean_variance=float(report.variance.mean()),
        passes=passes,
        confusion=counts.tolist(),
        confusion_normalized=normalize_rows(counts).tolist(),
    )
    logger.info(
        f"MC T={passes}: accuracy {summary.accuracy:.4f} AUROC maxP {summary.auroc_maxP} "
        f"entropy {summary.auroc_entropy}"
    )
    return summary, report
