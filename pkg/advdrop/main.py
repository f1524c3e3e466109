"""
Command-line entry point for advdrop.
"""
import json
import logging
import sys
from typing import List, Optional

import click

from advdrop.cli.router import register_commands
from advdrop.core.config import settings
from advdrop.utils.error_handling import EXIT_FAILURE, EXIT_OK, ErrorResponse, handle_exception
from advdrop.utils.logging import configure_logging

logger = logging.getLogger("advdrop")


@click.group(help=settings.PROJECT_DESCRIPTION)
@click.version_option(settings.VERSION, prog_name=settings.PROJECT_NAME)
@click.option("--log-level", default=None, help="Logging level, defaults to LOG_LEVEL")
def cli(log_level: Optional[str]) -> None:
    configure_logging(log_level)


register_commands(cli)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code; every failure goes through handle_exception."""
    try:
        result = cli.main(args=argv, prog_name="advdrop", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_FAILURE
    except Exception as exc:
        click.echo(json.dumps(ErrorResponse.from_exception(exc), default=str), err=True)
        return handle_exception(exc)
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
