"""
Command router: attaches every subcommand to the CLI group.
"""
import click

from advdrop.cli.commands import distcheck, evaluate, prune, train, uncertainty


def register_commands(group: click.Group) -> click.Group:
    group.add_command(train.train_command)
    group.add_command(evaluate.eval_command)
    group.add_command(uncertainty.uncertainty_command)
    group.add_command(prune.prune_command)
    group.add_command(distcheck.distcheck_command)
    return group
