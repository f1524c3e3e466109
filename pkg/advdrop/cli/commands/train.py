"""
`advdrop train`: fit every seed and summarize.
"""
import logging

import click

from advdrop.cli.config_loader import load_config
from advdrop.cli.options import experiment_options
from advdrop.services.experiment.runner import aggregate, format_mean_std, run_seeds, train_seed
from advdrop.utils.error_handling import EXIT_OK

logger = logging.getLogger("advdrop.cli")


@click.command("train")
@experiment_options
def train_command(config_path, **flags) -> int:
    """Train a network per seed and write metrics, rates, checkpoints and summaries."""
    cfg = load_config(config_path, flags)
    logger.info(f"Config {cfg.config_hash}: {cfg.dataset.name}, seeds {cfg.seeds}")
    outcomes = run_seeds(cfg, train_seed)
    summary = aggregate(cfg, outcomes)
    metric = outcomes[0].metric
    label = "acc" if metric == "accuracy" else metric
    text = format_mean_std(summary["final"][f"test_{metric}"], percent=metric == "accuracy")
    click.echo(f"{cfg.config_hash} {cfg.dataset.name} {label} {text} ({len(outcomes)} seeds)")
    return EXIT_OK
