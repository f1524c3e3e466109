"""
`advdrop distcheck`: mask pdf curves and inverse-gamma KL table.
"""
from pathlib import Path

import click

from advdrop.core.config import settings
from advdrop.services.experiment.distcheck import run_distcheck
from advdrop.utils.error_handling import EXIT_FAILURE, EXIT_OK


@click.command("distcheck")
@click.option("--outdir", default=None, help="Output root directory")
def distcheck_command(outdir) -> int:
    """Exit 0 iff the softplus-Gaussian fit beats the log-normal fit on every target with moments."""
    target = Path(outdir or settings.OUTPUT_DIR) / "distcheck"
    rows, passed = run_distcheck(target)
    for row in rows:
        verdict = "softplus-Gaussian" if row.softplus_gaussian_wins else "log-normal"
        flag = f" ({row.flag})" if row.flag else ""
        click.echo(
            f"k={row.k:g} theta={row.theta:g}: KL SG {row.kl_softplus_gaussian:.4g} "
            f"LN {row.kl_log_normal:.4g} -> {verdict}{flag}"
        )
    click.echo(f"wrote {target}")
    return EXIT_OK if passed else EXIT_FAILURE
