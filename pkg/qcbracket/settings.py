# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
User settings.
"""

from __future__ import annotations

from configparser import ConfigParser
from pathlib import Path

from ._common import CSV_DIGITS

DEFAULT_VERIFY_TRIALS = 200
"""Random instances per identity check."""

DEFAULT_VERIFY_SEED = 20240501
"""Seed of the identity suite when neither the command line nor the config sets one."""


class Settings:
    """
    Manage the user settings.

    Attributes
    ----------
    filename : str
        The full path to the configuration file.
    config : ConfigParser
        A configuration file parser.
    """

    def __init__(self, filename: str) -> None:
        """
        Construct a Settings manager.

        Parameters
        ----------
        filename : str
            The full path to the configuration file.
        """
        self.filename = filename
        self.config = ConfigParser()
        self.read_settings()

    def read_settings(self) -> None:
        """
        Read the settings from the configuration file.
        """
        self.config.read(self.filename)
        for section in ("verify", "output"):
            if not self.config.has_section(section):
                self.config.add_section(section)

    def write_settings(self) -> None:
        """
        Write the settings to the configuration file.
        """
        with Path(self.filename).open(mode="w", encoding="utf-8") as file:
            self.config.write(file)

    @property
    def output_dir(self) -> str | None:
        """
        Default output directory, or None when unset.
        """
        return self.config["output"].get("output_dir", fallback=None) or None

    @output_dir.setter
    def output_dir(self, output_dir: str) -> None:
        self.config["output"]["output_dir"] = output_dir

    @property
    def csv_digits(self) -> int:
        """
        Significant digits written for CSV floats.
        """
        return self.config["output"].getint("csv_digits", fallback=CSV_DIGITS)

    @csv_digits.setter
    def csv_digits(self, csv_digits: int) -> None:
        self.config["output"]["csv_digits"] = f"{csv_digits}"

    @property
    def verify_trials(self) -> int:
        """
        Random instances per identity check.
        """
        return self.config["verify"].getint("trials", fallback=DEFAULT_VERIFY_TRIALS)

    @verify_trials.setter
    def verify_trials(self, trials: int) -> None:
        self.config["verify"]["trials"] = f"{trials}"

    @property
    def verify_seed(self) -> int:
        """
        Seed of the identity suite.
        """
        return self.config["verify"].getint("seed", fallback=DEFAULT_VERIFY_SEED)

    @verify_seed.setter
    def verify_seed(self, seed: int) -> None:
        self.config["verify"]["seed"] = f"{seed}"
