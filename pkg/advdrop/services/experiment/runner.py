"""
Experiment orchestration: one directory per (config hash, seed).

Layout:
    <outdir>/<hash>/summary.json             aggregate over seeds
    <outdir>/<hash>/<seed>/metrics.jsonl     one epoch per line
    <outdir>/<hash>/<seed>/rates.csv         epoch, site, rate
    <outdir>/<hash>/<seed>/checkpoint.npz
    <outdir>/<hash>/<seed>/summary.json
    <outdir>/<hash>/<seed>/timing.log        timestamps and seconds, not byte-stable
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

from pydantic import BaseModel, Field

from advdrop.schemas.experiment import ExperimentConfig
from advdrop.schemas.model import FcSpec, Task
from advdrop.services.data.dataset import Dataset
from advdrop.services.data.registry import DatasetInfo, get_dataset_info, load_dataset
from advdrop.services.evaluation.statistics import mean_std
from advdrop.services.experiment.artifacts import write_json
from advdrop.services.metrics.collector import MetricsCollector
from advdrop.services.network import build, save_checkpoint
from advdrop.services.training import fit
from advdrop.utils.ids import Stream, make_rng
from advdrop.utils.logging import attach_sidecar, detach_sidecar

logger = logging.getLogger("advdrop.experiment")


class SeedOutcome(BaseModel):
    """What one seed produced."""
    seed: int
    metric: str
    final: Dict[str, float]
    run_dir: str
    extra: Dict[str, Any] = Field(default_factory=dict)


def hash_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output.outdir) / cfg.config_hash


def run_dir(cfg: ExperimentConfig, seed: int) -> Path:
    return hash_dir(cfg) / str(seed)


def model_spec(cfg: ExperimentConfig, info: DatasetInfo, train: Dataset) -> FcSpec:
    output_dim = info.output_dim
    if info.task is Task.CLASSIFICATION and train.n_classes:
        output_dim = max(output_dim, train.n_classes)
    return cfg.model.to_spec(train.n_features, output_dim, info.task, info.default_hidden, info.mask_input)


def prepare(cfg: ExperimentConfig, seed: int) -> Tuple[FcSpec, Dataset, Dataset]:
    """Data and network spec for one seed."""
    info = get_dataset_info(cfg.dataset.name)
    train, test = load_dataset(cfg.dataset, seed)
    return model_spec(cfg, info, train), train, test


def base_summary(cfg: ExperimentConfig, seed: int) -> Dict[str, Any]:
    return {"config_hash": cfg.config_hash, "seed": seed, "config": cfg.hash_payload()}


def train_seed(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
    """Train one seed and write its artifacts."""
    directory = run_dir(cfg, seed)
    sidecar = attach_sidecar(directory / "timing.log")
    try:
        spec, train, test = prepare(cfg, seed)
        model = build(spec, make_rng(seed, Stream.INIT))
        with MetricsCollector(directory, cfg.config_hash, seed):
            record = fit(model, train, test, cfg.train_config(seed), config_hash=cfg.config_hash)
        save_checkpoint(directory / "checkpoint.npz", model, cfg.config_hash, seed)
        write_json(directory / "summary.json", {
            **base_summary(cfg, seed),
            "metric": record.metric,
            "final": record.final,
            "distribution_drift": record.distribution_drift,
            "epochs": len(record.rows),
            "data_digests": {**train.digests, **test.digests},
        })
        seconds = [row.seconds for row in record.rows if row.seconds is not None]
        if seconds:
            logger.info(f"Seed {seed}: {sum(seconds) / len(seconds):.3f} s/epoch")
        return SeedOutcome(seed=seed, metric=record.metric, final=record.final, run_dir=str(directory))
    finally:
        detach_sidecar(sidecar)


def run_seeds(cfg: ExperimentConfig, job: Callable[[ExperimentConfig, int], SeedOutcome]) -> List[SeedOutcome]:
    """Run a per-seed job for every seed, in worker processes when output.workers > 1."""
    if cfg.output.workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.output.workers) as pool:
            futures = [pool.submit(job, cfg, seed) for seed in cfg.seeds]
            return [future.result() for future in futures]
    return [job(cfg, seed) for seed in cfg.seeds]


def aggregate(cfg: ExperimentConfig, outcomes: List[SeedOutcome], name: str = "summary.json") -> Dict[str, Any]:
    """Mean ± std of every final metric over seeds, written next to the seed directories."""
    keys = sorted({key for outcome in outcomes for key in outcome.final})
    stats = {}
    for key in keys:
        values = [o.final[key] for o in outcomes if key in o.final]
        mean, std = mean_std(values)
        stats[key] = {"mean": mean, "std": std, "values": values}
    summary = {
        "config_hash": cfg.config_hash,
        "seeds": [o.seed for o in outcomes],
        "metric": outcomes[0].metric if outcomes else None,
        "final": stats,
    }
    write_json(hash_dir(cfg) / name, summary)
    return summary


def format_mean_std(entry: Dict[str, Any], percent: bool = False) -> str:
    """Table-style "mean±std" text."""
    if percent:
        return f"{entry['mean'] * 100:.2f}±{entry['std'] * 100:.2f}"
    return f"{entry['mean']:.4f}±{entry['std']:.4f}"
