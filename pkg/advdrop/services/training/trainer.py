"""
Training loop: shuffled mini-batches, eval-mode test metrics per epoch and
per-site dropout telemetry.
"""
import logging
import time
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from advdrop.core.exceptions import DimensionError, EmptyBatchError, TrainingDivergedError
from advdrop.schemas.model import Task
from advdrop.schemas.training import EpochRow, LossKind, RunRecord, SiteTelemetry, TrainConfig
from advdrop.services.autodiff import backward, no_grad
from advdrop.services.data.dataset import Dataset
from advdrop.services.distributions import ModelFreeDist, mask_kl
from advdrop.services.dropout import Mode
from advdrop.services.event_bus.bus import EventBus, get_event_bus
from advdrop.services.event_bus.events import EventType
from advdrop.services.training.loss import batch_objective
from advdrop.services.training.optimizer import SGD, lr_at
from advdrop.utils.ids import Stream, make_rng

logger = logging.getLogger("advdrop.training")


def minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Index batches over one full permutation; the last batch may be short."""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def _metric_name(task: Task) -> str:
    return "rmse" if task is Task.REGRESSION else "accuracy"


def _batch_score(outputs: np.ndarray, targets: np.ndarray, task: Task) -> float:
    """Correct count for classification, summed squared error for regression."""
    if task is Task.REGRESSION:
        diff = outputs.reshape(-1) - np.asarray(targets, dtype=np.float64).reshape(-1)
        return float(np.sum(diff * diff))
    return float(np.sum(np.argmax(outputs, axis=1) == targets))


def _finish_metric(score: float, n: int, task: Task) -> float:
    return float(np.sqrt(score / n)) if task is Task.REGRESSION else score / n


def evaluate(model, ds: Dataset, loss: LossKind, batch_size: int = 1000) -> Tuple[float, float]:
    """
    Eval-mode loss and metric over a whole dataset.

    Returns:
        Tuple[float, float]: (mean loss, accuracy or RMSE)
    """
    if len(ds) == 0:
        raise EmptyBatchError("Cannot evaluate an empty dataset")
    previous = model.mode
    total_loss = 0.0
    score = 0.0
    with no_grad():
        model.eval()
        for start in range(0, len(ds), batch_size):
            x = ds.features[start:start + batch_size]
            y = ds.targets[start:start + batch_size]
            outputs = model.forward(x)
            total_loss += _eval_loss(outputs.data, y, loss) * len(x)
            score += _batch_score(outputs.data, y, ds.task)
    model.set_mode(previous)
    return total_loss / len(ds), _finish_metric(score, len(ds), ds.task)


def _eval_loss(outputs: np.ndarray, targets: np.ndarray, loss: LossKind) -> float:
    if loss is LossKind.MSE:
        diff = outputs.reshape(-1) - np.asarray(targets, dtype=np.float64).reshape(-1)
        return float(np.mean(diff * diff))
    shifted = outputs - outputs.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(log_norm - shifted[np.arange(len(targets)), targets]))


def _diagnostics(model, epoch: int, batch: int, loss_value: float) -> dict:
    sites = []
    for site in model.advanced_sites:
        if site.last_mu is None:
            continue
        sites.append({
            "site": site.site,
            "mu_mean": float(np.nanmean(site.last_mu)),
            "sigma_mean": float(np.nanmean(site.last_sigma)),
            "mu_finite": bool(np.all(np.isfinite(site.last_mu))),
        })
    norms = {name: float(np.linalg.norm(p.data)) for name, p in model.named_parameters().items()}
    return {"epoch": epoch, "batch": batch, "loss": loss_value, "sites": sites, "parameter_norms": norms}


def _site_distributions(model) -> Dict[int, ModelFreeDist]:
    return {s.site: s.mask_distribution() for s in model.advanced_sites if s.last_mu is not None}


def fit(
    model,
    train: Dataset,
    test: Dataset,
    cfg: TrainConfig,
    config_hash: str = "",
    bus: Optional[EventBus] = None,
) -> RunRecord:
    """
    Train a model and record one telemetry row per epoch.

    Mask noise and shuffling share the run's TRAIN stream, so a fixed
    config and seed reproduce the record exactly on a single thread.

    Args:
        model: Network built from an FcSpec
        train: Training data
        test: Held-out data evaluated in eval mode after every epoch
        cfg: Optimizer and loop settings
        config_hash: Hash stamped on every event and row
        bus: Event bus for telemetry, the process singleton by default

    Returns:
        RunRecord: Epoch rows, final metrics and learned-distribution drift

    Raises:
        DimensionError: if the data width does not match the model
        TrainingDivergedError: on a non-finite loss, with diagnostics in details
    """
    if len(train) == 0:
        raise EmptyBatchError("Training set is empty")
    width = model.spec.layer_dims[0]
    for ds in (train, test):
        if ds.n_features != width:
            raise DimensionError(f"{ds.split} data has {ds.n_features} features, model expects {width}")

    bus = bus or get_event_bus()
    task = train.task
    metric = _metric_name(task)
    rng = make_rng(cfg.seed, Stream.TRAIN)
    optimizer = SGD(model.parameters(), cfg)
    record = RunRecord(config_hash=config_hash, seed=cfg.seed, metric=metric)
    history: Dict[int, List[ModelFreeDist]] = {}
    stamp = {"config_hash": config_hash, "seed": cfg.seed}

    bus.publish(EventType.TRAINING_STARTED, {**stamp, "epochs": cfg.epochs, "n_train": len(train)})
    logger.info(f"Training {config_hash or 'run'} seed {cfg.seed}: {cfg.epochs} epochs on {len(train)} samples")

    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        lr = lr_at(cfg, epoch)
        model.train()
        total_loss = 0.0
        score = 0.0
        for batch, idx in enumerate(minibatches(len(train), cfg.batch_size, rng)):
            x, y = train.features[idx], train.targets[idx]
            optimizer.zero_grad()
            loss, outputs = batch_objective(model, x, y, cfg.loss, rng)
            loss_value = loss.item()
            if not np.isfinite(loss_value):
                details = _diagnostics(model, epoch, batch, loss_value)
                bus.publish(EventType.TRAINING_ABORTED, {**stamp, **details})
                raise TrainingDivergedError(
                    f"Loss became {loss_value} at epoch {epoch}, batch {batch}", details=details
                )
            backward(loss)
            optimizer.step(lr)
            total_loss += loss_value * len(idx)
            score += _batch_score(outputs.data, y, task)

        sites = [SiteTelemetry(**row) for row in model.site_telemetry()]
        for site, dist in _site_distributions(model).items():
            history.setdefault(site, []).append(dist)

        train_loss = total_loss / len(train)
        train_metric = _finish_metric(score, len(train), task)
        test_loss, test_metric = evaluate(model, test, cfg.loss, cfg.eval_batch_size)
        gap = test_metric - train_metric if task is Task.REGRESSION else train_metric - test_metric
        row = EpochRow(
            epoch=epoch, lr=lr, train_loss=train_loss, train_metric=train_metric,
            test_loss=test_loss, test_metric=test_metric, gap=gap, sites=sites,
            seconds=time.perf_counter() - started,
        )
        record.rows.append(row)
        bus.publish(EventType.EPOCH_COMPLETED, {**stamp, "row": row.model_dump(exclude={"seconds"})})
        rates = " ".join(f"{s.rate:.3f}" for s in sites)
        logger.info(
            f"Epoch {epoch}: lr {lr:g} train_loss {train_loss:.4f} test_{metric} {test_metric:.4f}"
            f" rates [{rates}] ({row.seconds:.2f}s)"
        )

    last = record.rows[-1]
    record.final = {
        f"train_{metric}": last.train_metric,
        f"test_{metric}": last.test_metric,
        "train_loss": last.train_loss,
        "test_loss": last.test_loss,
    }
    record.distribution_drift = {
        str(site): [mask_kl(dist, dists[-1]) for dist in dists] for site, dists in history.items()
    }
    bus.publish(EventType.TRAINING_COMPLETED, {**stamp, "final": record.final})
    return record


def predict(model, x: np.ndarray, mode=Mode.EVAL, rng: Optional[np.random.Generator] = None,
            batch_size: int = 1000) -> np.ndarray:
    """Batched forward without recording a graph."""
    chunks = []
    previous = model.mode
    with no_grad():
        model.set_mode(mode)
        for start in range(0, len(x), batch_size):
            chunks.append(model.forward(x[start:start + batch_size], rng=rng).numpy())
    model.set_mode(previous)
    return np.concatenate(chunks, axis=0)
