# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Uniform periodic grids and FFT-based derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from ._common import TWO_PI
from .errors import ShapeMismatchError

if TYPE_CHECKING:
    from numpy.typing import NDArray

MIN_POINTS = 8
"""Smallest admissible number of grid points."""


@dataclass(frozen=True)
class Grid1D:
    """
    A uniform periodic grid with points −L/2 + j·L/N, j = 0 … N−1.

    Examples
    --------
    >>> grid = Grid1D(8, 4.0)
    >>> grid.spacing
    0.5
    >>> float(grid.points[0]), float(grid.points[-1])
    (-2.0, 1.5)
    """

    n_points: int
    """Number of points, a power of two and at least 8."""
    extent: float
    """Length L of the periodic box."""

    def __post_init__(self) -> None:
        n = int(self.n_points)
        if n < MIN_POINTS or n & (n - 1):
            msg = (
                f"grid size must be a power of two and at least {MIN_POINTS}, "
                f"got {self.n_points}"
            )
            raise ShapeMismatchError(msg)
        if not math.isfinite(self.extent) or self.extent <= 0:
            msg = f"grid extent must be positive, got {self.extent}"
            raise ShapeMismatchError(msg)

    @property
    def spacing(self) -> float:
        """Distance between neighbouring points."""
        return self.extent / self.n_points

    @cached_property
    def points(self) -> NDArray[np.float64]:
        """The grid coordinates."""
        return -self.extent / 2 + np.arange(self.n_points) * self.spacing

    @cached_property
    def wavenumbers(self) -> NDArray[np.float64]:
        """Angular wavenumbers 2π·fftfreq, in numpy FFT order."""
        return TWO_PI * np.fft.fftfreq(self.n_points, d=self.spacing)

    def conjugate(self, h: float) -> Grid1D:
        """
        The momentum grid paired with this position grid.

        It has the same number of points and extent h/dx, so its spacing is h/L.
        """
        return Grid1D(self.n_points, h / self.spacing)


def derivative(
    values: NDArray[np.complex128], grid: Grid1D, axis: int = -1, order: int = 1
) -> NDArray[np.complex128]:
    """
    Spectral derivative of periodic samples along one axis.

    The Nyquist mode is dropped for odd orders so that real input stays real.

    Parameters
    ----------
    values : numpy.ndarray
        Samples on `grid` along `axis`.
    grid : Grid1D
        The grid the axis is sampled on.
    axis : int, optional
        The axis to differentiate.
    order : int, optional
        Number of derivatives, at least zero.

    Returns
    -------
    numpy.ndarray
        The complex derivative samples.
    """
    values = np.asarray(values)
    if values.shape[axis] != grid.n_points:
        msg = f"axis {axis} has {values.shape[axis]} samples, grid has {grid.n_points}"
        raise ShapeMismatchError(msg)
    if order == 0:
        return values.astype(np.complex128)
    multiplier = (1j * grid.wavenumbers) ** order
    if order % 2:
        multiplier[grid.n_points // 2] = 0
    shape = [1] * values.ndim
    shape[axis] = grid.n_points
    spectrum = np.fft.fft(values, axis=axis) * multiplier.reshape(shape)
    return np.fft.ifft(spectrum, axis=axis)


def derivative_matrix(grid: Grid1D, order: int = 1) -> NDArray[np.complex128]:
    """
    Dense matrix of the spectral derivative on a grid.
    """
    return derivative(np.eye(grid.n_points, dtype=np.complex128), grid, axis=0, order=order)
