# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Shared constants and small helpers used throughout the package.
"""

from __future__ import annotations

import logging
import math

DROP_TOLERANCE = 1e-14
"""Relative magnitude below which polynomial coefficients are discarded."""

IDENTITY_TOLERANCE = 1e-10
"""Largest coefficient residual accepted by the identity suite."""

SLOPE_TOLERANCE = 0.05
"""Accepted deviation of the classical-limit log-log slope from 2."""

HERMITICITY_TOLERANCE = 1e-10
"""Largest |ρ_ij − conj(ρ_ji)| accepted after a propagation."""

PURITY_THRESHOLD = 0.99
"""Smallest purity for which a mixed density reduces to a mean-field state."""

CSV_DIGITS = 17
"""Significant digits written for every floating point CSV field."""

OUTPUT_ENV_VAR = "QCBRACKET_OUT_DIR"
"""Environment variable that overrides the output directory."""

TWO_PI = 2.0 * math.pi


def format_float(value: float, digits: int = CSV_DIGITS) -> str:
    """
    Format a float with a fixed number of significant digits.

    The result never depends on the current locale.

    Parameters
    ----------
    value : float
        The number to format.
    digits : int, optional
        The number of significant digits.

    Returns
    -------
    str
        The formatted number.

    Examples
    --------
    >>> format_float(0.1)
    '0.10000000000000001'
    >>> format_float(2.0)
    '2'
    >>> format_float(1/3, digits=4)
    '0.3333'
    """
    return f"{float(value):.{digits}g}"


def hbar(h: float) -> float:
    """
    Return the reduced Planck constant h/2π.
    """
    return h / TWO_PI


def check_planck(h: float) -> float:
    """
    Validate a Planck constant and return it as a float.

    Raises
    ------
    ValueError
        If `h` is not a finite positive number.
    """
    value = float(h)
    if not math.isfinite(value) or value <= 0:
        msg = f"Planck constant must be positive, got {h!r}"
        raise ValueError(msg)
    return value


def get_logging_level(verbose: int, *, quiet: bool = False) -> int:
    """
    Convert the command line verbosity flags to a logging level.
    """
    if quiet:
        return logging.WARNING
    if verbose <= 0:
        return logging.INFO
    return logging.DEBUG
