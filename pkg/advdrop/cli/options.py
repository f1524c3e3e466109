"""
Shared command-line options.
"""
from typing import Callable, List

import click

from advdrop.schemas.experiment import Granularity, PruneMethod
from advdrop.schemas.model import DropoutKind, PriorMode
from advdrop.schemas.training import LRSchedule


def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _choice(enum) -> click.Choice:
    return click.Choice([member.value for member in enum])


EXPERIMENT_OPTIONS: List[Callable] = [
    click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML experiment config"),
    click.option("--dataset", help="Registered dataset name"),
    click.option("--data-path", help="Data directory or file, overrides ADVDROP_DATA_DIR"),
    click.option("--train-size", type=int, help="Random training subset size"),
    click.option("--test-size", type=int, help="Random test subset size"),
    click.option("--dropout", type=_choice(DropoutKind), help="Dropout kind for every site"),
    click.option("--init-mu", type=float, help="Initial seed mean of advanced sites"),
    click.option("--init-sigma", type=float, help="Initial seed std of advanced sites"),
    click.option("--prior-mode", type=_choice(PriorMode), help="encoder, free or fixed prior"),
    click.option("--mask-input", type=click.BOOL, default=None, help="Mask input features"),
    click.option("--hidden", callback=_int_list, help="Hidden widths, e.g. 800,800"),
    click.option("--epochs", type=int, help="Training epochs"),
    click.option("--lr", type=float, help="Initial learning rate"),
    click.option("--lr-schedule", type=_choice(LRSchedule), help="Learning-rate schedule"),
    click.option("--batch-size", type=int, help="Mini-batch size"),
    click.option("--grad-clip", type=float, help="Global gradient-norm clip"),
    click.option("--seeds", callback=_int_list, help="Comma-separated run seeds"),
    click.option("--outdir", help="Output root directory"),
    click.option("--workers", type=int, help="Parallel seed workers"),
]

PRUNE_OPTIONS: List[Callable] = [
    click.option("--granularity", type=_choice(Granularity), help="node or parameter"),
    click.option("--q", type=float, help="Percent of kept entries pruned per round"),
    click.option("--rounds", type=int, help="Pruning rounds"),
    click.option("--method", "methods", type=_choice(PruneMethod), multiple=True,
                 help="Selection method; repeat to run several"),
]

CHECKPOINT_OPTION = click.option("--checkpoint", type=click.Path(dir_okay=False),
                                 help="Checkpoint file, defaults to the run directory's")


def apply_options(options: List[Callable]) -> Callable:
    def decorator(fn: Callable) -> Callable:
        for option in reversed(options):
            fn = option(fn)
        return fn
    return decorator


experiment_options = apply_options(EXPERIMENT_OPTIONS)
prune_options = apply_options(PRUNE_OPTIONS)
