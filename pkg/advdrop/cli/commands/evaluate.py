"""
`advdrop eval`: eval-mode metrics of stored checkpoints.
"""
from functools import partial

import click

from advdrop.cli.config_loader import load_config
from advdrop.cli.options import CHECKPOINT_OPTION, experiment_options
from advdrop.services.experiment.jobs import evaluate_seed
from advdrop.services.experiment.runner import aggregate, format_mean_std, run_seeds
from advdrop.utils.error_handling import EXIT_OK


@click.command("eval")
@experiment_options
@CHECKPOINT_OPTION
def eval_command(config_path, checkpoint, **flags) -> int:
    """Evaluate the checkpoint of each seed on its test split."""
    cfg = load_config(config_path, flags)
    outcomes = run_seeds(cfg, partial(evaluate_seed, checkpoint=checkpoint))
    summary = aggregate(cfg, outcomes, name="eval_summary.json")
    metric = outcomes[0].metric
    text = format_mean_std(summary["final"][f"test_{metric}"], percent=metric == "accuracy")
    click.echo(f"{cfg.config_hash} eval {metric} {text}")
    return EXIT_OK
