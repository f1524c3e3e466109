"""
`advdrop uncertainty`: MC inference and correctness-detection AUROC.
"""
import click

from advdrop.cli.config_loader import load_config
from advdrop.cli.options import CHECKPOINT_OPTION, experiment_options
from advdrop.services.experiment.jobs import uncertainty_seed
from advdrop.services.experiment.runner import aggregate, format_mean_std
from advdrop.utils.error_handling import EXIT_OK


@click.command("uncertainty")
@experiment_options
@CHECKPOINT_OPTION
@click.option("--T", "passes", type=int, help="Monte Carlo forward passes")
@click.option("--save-samples/--no-save-samples", default=None, help="Write per-sample means and variances")
def uncertainty_command(config_path, checkpoint, **flags) -> int:
    """Run T stochastic passes per test sample and report AUROCs of max probability and entropy."""
    cfg = load_config(config_path, flags)
    # Seeds run in turn; workers parallelize the passes instead.
    outcomes = [uncertainty_seed(cfg, seed, checkpoint, threads=cfg.output.workers) for seed in cfg.seeds]
    summary = aggregate(cfg, outcomes, name="uncertainty_summary.json")
    parts = [f"{key} {format_mean_std(summary['final'][key])}" for key in sorted(summary["final"])]
    click.echo(f"{cfg.config_hash} T={cfg.uncertainty.passes} " + " ".join(parts))
    return EXIT_OK
