# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
File utility functions.
"""

from __future__ import annotations

import logging
import os
from pathlib import Path

import platformdirs

from ._common import OUTPUT_ENV_VAR

SETTINGS_FILE = "qcbracket.ini"
"""The settings file used by the package."""

DEFAULT_OUTPUT_DIR = "results"
"""Output directory used when nothing else names one."""

logger = logging.getLogger(__name__)


def settings_path(*, create: bool = True) -> str:
    """
    Get the full path for the settings file.

    Parameters
    ----------
    create : bool, optional
        Create the settings directory if it does not exist yet.
    """
    package = __package__ if __package__ else Path(__file__).parts[-2]
    base_dir = platformdirs.user_config_path(package)
    if create and not base_dir.exists():
        base_dir.mkdir(parents=True)
    return f"{base_dir / SETTINGS_FILE}"


def resolve_output_dir(
    cli_value: str | None = None,
    config_value: str | None = None,
    settings_value: str | None = None,
) -> Path:
    """
    Pick the output directory for a run.

    The first of these that is set wins: the ``--out`` option, the
    ``QCBRACKET_OUT_DIR`` environment variable, the run configuration, the
    settings file, and finally ``./results``.

    Examples
    --------
    >>> resolve_output_dir("out", "ignored").name
    'out'
    """
    for source, value in (
        ("command line", cli_value),
        ("environment", os.environ.get(OUTPUT_ENV_VAR)),
        ("run configuration", config_value),
        ("settings file", settings_value),
    ):
        if value:
            logger.debug("output directory %s taken from the %s", value, source)
            return Path(value)
    return Path(DEFAULT_OUTPUT_DIR)


def ensure_directory(path: Path) -> Path:
    """
    Create `path` (and parents) if needed and return it.

    Raises
    ------
    OSError
        If the directory cannot be created or is not writable.
    """
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        msg = f"output directory {path} is not writable"
        raise PermissionError(msg)
    return path
