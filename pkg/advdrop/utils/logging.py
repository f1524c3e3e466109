"""
Logging setup shared by the CLI and scripts.
"""
import logging
from pathlib import Path
from typing import Optional, Union

from advdrop.core.config import settings


def configure_logging(
    level: Optional[str] = None,
    sidecar_path: Optional[Union[str, Path]] = None,
) -> None:
    """
    Configure root logging once.

    Args:
        level: Level name, defaults to settings.LOG_LEVEL
        sidecar_path: Optional file that also receives every record
    """
    handlers: list = [logging.StreamHandler()]
    if sidecar_path is not None:
        Path(sidecar_path).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(sidecar_path, mode="a"))

    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format=settings.LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def attach_sidecar(path: Union[str, Path], logger_name: str = "advdrop") -> logging.Handler:
    """Add a file handler to one logger tree and return it so the caller can detach it."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, mode="w")
    handler.setFormatter(logging.Formatter(settings.LOG_FORMAT))
    logging.getLogger(logger_name).addHandler(handler)
    return handler


def detach_sidecar(handler: logging.Handler, logger_name: str = "advdrop") -> None:
    logging.getLogger(logger_name).removeHandler(handler)
    handler.close()
