"""
`advdrop prune`: prune-reset-retrain cycles.
"""
import click

from advdrop.cli.config_loader import load_config
from advdrop.cli.options import experiment_options, prune_options
from advdrop.services.experiment.jobs import prune_seed
from advdrop.services.experiment.runner import aggregate, run_seeds
from advdrop.utils.error_handling import EXIT_OK


def _round_key(key: str):
    method, round_index = key.split(":")
    return method, int(round_index)


@click.command("prune")
@experiment_options
@prune_options
def prune_command(config_path, **flags) -> int:
    """Train, prune the q% highest-rate entries, reset to initialization and retrain, per round."""
    cfg = load_config(config_path, flags)
    outcomes = run_seeds(cfg, prune_seed)
    summary = aggregate(cfg, outcomes, name="prune_summary.json")
    for key, entry in sorted(summary["final"].items(), key=lambda item: _round_key(item[0])):
        click.echo(f"{cfg.config_hash} {key} {entry['mean']:.4f}±{entry['std']:.4f}")
    return EXIT_OK
