# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Symbol to operator correspondence on a periodic position grid.

A position grid of N points and spacing dx pairs with a momentum grid of N
points and spacing h/L. Grid symbols are sampled on that momentum grid times
the midpoint lattice of 2N points and spacing dx/2, so the Weyl kernel

    K(x_a, x_b) = h⁻¹ Σ_j σ(k_j, (x_a + x_b)/2) e^{2πi(x_a − x_b)k_j/h} dk

uses exact midpoints. Separations wrap into [−N/2, N/2); the Nyquist
separation averages its two periodic midpoints. With this normalization the
constant symbol 1 maps to the identity operator.

`OperatorMatrix.entries` holds kernel values; the dimensionless matrix
acting on grid vectors is `OperatorMatrix.operator`, the kernel times dx.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import linalg

from ._common import TWO_PI, check_planck, hbar
from .errors import BasisMismatchError, NyquistError, ShapeMismatchError, VariableError
from .spectral import Grid1D
from .symbols import PolySymbol, Sector

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

BYTE_ORDER = "<"
"""Byte order of binary exports: little endian throughout."""

_COMPLEX = np.dtype(f"{BYTE_ORDER}c16")
_INDEX = np.dtype(f"{BYTE_ORDER}i8")

GRID_TOLERANCE = 1e-12
"""Relative mismatch allowed between a symbol's momentum box and h/dx."""


class Basis(Enum):
    """
    Basis an operator matrix is expressed in.
    """

    POSITION_GRID = "position_grid"
    HO_EIGENBASIS = "ho_eigenbasis"


class Ordering(Enum):
    """
    Operator ordering used to read a kernel as a symbol.
    """

    WEYL = "weyl"
    KOHN_NIRENBERG = "kohn_nirenberg"


def momentum_grid(grid: Grid1D, h: float) -> Grid1D:
    """
    The momentum grid paired with a position grid: N points, extent h/dx.
    """
    return grid.conjugate(check_planck(h))


def midpoint_grid(grid: Grid1D) -> Grid1D:
    """
    The lattice of all pairwise midpoints: 2N points, spacing dx/2.
    """
    return Grid1D(2 * grid.n_points, grid.extent)


@dataclass(frozen=True, eq=False)
class GridSymbol:
    """
    A symbol sampled on the momentum grid times the midpoint lattice.
    """

    values: NDArray[np.complex128]
    """Samples σ(k_j, x̄_s), shape (N, 2N)."""
    k_grid: Grid1D
    """The momentum grid, N points."""
    x_grid: Grid1D
    """The midpoint lattice, 2N points."""

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        expected = (self.k_grid.n_points, self.x_grid.n_points)
        if values.shape != expected:
            msg = f"symbol samples have shape {values.shape}, grids need {expected}"
            raise ShapeMismatchError(msg)
        if self.x_grid.n_points != 2 * self.k_grid.n_points:
            msg = "the midpoint lattice must have twice as many points as the momentum grid"
            raise ShapeMismatchError(msg)
        object.__setattr__(self, "values", values)

    @property
    def position_grid(self) -> Grid1D:
        """The position grid the kernel acts on."""
        return Grid1D(self.x_grid.n_points // 2, self.x_grid.extent)

    @property
    def mesh(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Momentum and midpoint coordinates, each of shape (N, 2N)."""
        k, x = np.meshgrid(self.k_grid.points, self.x_grid.points, indexing="ij")
        return k, x

    @classmethod
    def from_function(
        cls, func: Callable[[Any, Any], ArrayLike], grid: Grid1D, h: float
    ) -> GridSymbol:
        """
        Sample a callable ``func(k, x)`` for kernels on `grid`.

        Parameters
        ----------
        func : callable
            Vectorized function of momentum and position arrays.
        grid : Grid1D
            The position grid the kernel will act on.
        h : float
            Planck's constant, which fixes the momentum box.

        Returns
        -------
        GridSymbol
            The samples on the momentum grid times the midpoint lattice.
        """
        k_grid = momentum_grid(grid, h)
        x_grid = midpoint_grid(grid)
        k, x = np.meshgrid(k_grid.points, x_grid.points, indexing="ij")
        values = np.broadcast_to(np.asarray(func(k, x), dtype=np.complex128), k.shape)
        return cls(values.copy(), k_grid, x_grid)

    @classmethod
    def from_poly(cls, sigma: PolySymbol, grid: Grid1D, h: float) -> GridSymbol:
        """
        Sample a polynomial symbol in one quantum pair and no classical variables.

        Raises
        ------
        VariableError
            If the symbol has more than one quantum pair or classical variables.
        """
        if sigma.context.n_quantum != 1 or sigma.depends_on(Sector.CLASSICAL):
            msg = "grid symbols support exactly one quantum pair and no classical variables"
            raise VariableError(msg)
        fixed = {var: 0.0 for var in sigma.context.variables if var.sector == Sector.CLASSICAL}
        return cls.from_function(
            lambda k, x: sigma.evaluate({"k0": k, "x0": x, **fixed}), grid, h
        )

    def __add__(self, other: GridSymbol) -> GridSymbol:
        self._check_grids(other)
        return GridSymbol(self.values + other.values, self.k_grid, self.x_grid)

    def __sub__(self, other: GridSymbol) -> GridSymbol:
        self._check_grids(other)
        return GridSymbol(self.values - other.values, self.k_grid, self.x_grid)

    def __mul__(self, factor: complex) -> GridSymbol:
        return GridSymbol(self.values * factor, self.k_grid, self.x_grid)

    __rmul__ = __mul__

    def _check_grids(self, other: GridSymbol) -> None:
        if (self.k_grid, self.x_grid) != (other.k_grid, other.x_grid):
            msg = "grid symbols live on different grids"
            raise ShapeMismatchError(msg)

    def to_json_dict(self) -> dict[str, Any]:
        """Shape, grids and row-major real and imaginary parts."""
        return {
            "shape": list(self.values.shape),
            "k_grid": {"n_points": self.k_grid.n_points, "extent": self.k_grid.extent},
            "x_grid": {"n_points": self.x_grid.n_points, "extent": self.x_grid.extent},
            "re": self.values.real.ravel().tolist(),
            "im": self.values.imag.ravel().tolist(),
        }

    def to_bytes(self) -> bytes:
        """
        Binary export.

        Two little-endian int64 dimensions followed by little-endian
        complex128 samples in row-major order.
        """
        header = np.asarray(self.values.shape, dtype=_INDEX).tobytes()
        return header + np.ascontiguousarray(self.values, dtype=_COMPLEX).tobytes()


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """
    A dense operator in a position grid or an oscillator eigenbasis.
    """

    entries: NDArray[np.complex128]
    """Kernel values on the position grid, or matrix elements in an eigenbasis."""
    basis: Basis
    """The basis the entries refer to."""
    h: float
    """Planck's constant the operator was built with."""
    grid: Grid1D | None = None
    """The position grid, for position-grid matrices."""
    hermitian: bool = field(default=False, compare=False)
    """Whether the construction guarantees a Hermitian operator."""

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:  # noqa: PLR2004
            msg = f"operator entries must be square, got shape {entries.shape}"
            raise ShapeMismatchError(msg)
        if not np.all(np.isfinite(entries)):
            msg = "operator entries must be finite"
            raise ValueError(msg)
        if self.basis == Basis.POSITION_GRID:
            if self.grid is None or self.grid.n_points != entries.shape[0]:
                msg = "position-grid operators need a grid matching their dimension"
                raise ShapeMismatchError(msg)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        """Matrix dimension."""
        return int(self.entries.shape[0])

    @property
    def weight(self) -> float:
        """Quadrature weight that turns entries into a matrix acting on vectors."""
        return self.grid.spacing if self.basis == Basis.POSITION_GRID and self.grid else 1.0

    @property
    def operator(self) -> NDArray[np.complex128]:
        """The dimensionless matrix acting on coefficient vectors."""
        return self.entries * self.weight

    def hermiticity_error(self) -> float:
        """Largest |A_ab − conj(A_ba)| of the operator matrix."""
        matrix = self.operator
        return float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        """True if the operator is Hermitian to `tol`, relative to its largest entry."""
        scale = max(float(np.max(np.abs(self.operator), initial=0.0)), 1.0)
        return self.hermiticity_error() <= tol * scale

    def in_basis(self, vectors: NDArray[np.complex128]) -> OperatorMatrix:
        """
        Matrix elements V†AV in the orthonormal columns of `vectors`.

        Raises
        ------
        BasisMismatchError
            If the operator is not on a position grid.
        ShapeMismatchError
            If the vectors do not live on the operator's grid.
        """
        if self.basis != Basis.POSITION_GRID:
            msg = "only position-grid operators can be projected onto an eigenbasis"
            raise BasisMismatchError(msg)
        vectors = np.asarray(vectors)
        if vectors.shape[0] != self.dim:
            msg = (
                f"basis vectors have length {vectors.shape[0]}, "
                f"operator has dimension {self.dim}"
            )
            raise ShapeMismatchError(msg)
        projected = vectors.conj().T @ self.operator @ vectors
        return OperatorMatrix(projected, Basis.HO_EIGENBASIS, self.h, hermitian=self.hermitian)

    def to_json_dict(self) -> dict[str, Any]:
        """Basis, dimension, grid and row-major real and imaginary parts."""
        grid = None
        if self.grid is not None:
            grid = {"n_points": self.grid.n_points, "extent": self.grid.extent}
        return {
            "basis": self.basis.value,
            "dim": self.dim,
            "h": self.h,
            "grid": grid,
            "re": self.entries.real.ravel().tolist(),
            "im": self.entries.imag.ravel().tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> OperatorMatrix:
        """Parse the layout written by :meth:`to_json_dict`."""
        dim = int(data["dim"])
        entries = np.asarray(data["re"], float) + 1j * np.asarray(data["im"], float)
        entries = entries.reshape(dim, dim)
        grid = None
        if data.get("grid") is not None:
            grid = Grid1D(int(data["grid"]["n_points"]), float(data["grid"]["extent"]))
        return cls(entries, Basis(data["basis"]), float(data["h"]), grid)

    def dumps(self) -> str:
        """JSON export."""
        return json.dumps(self.to_json_dict())

    def to_bytes(self) -> bytes:
        """
        Binary export.

        One little-endian int64 dimension followed by little-endian complex128
        kernel entries in row-major order.
        """
        header = np.asarray([self.dim], dtype=_INDEX).tobytes()
        return header + np.ascontiguousarray(self.entries, dtype=_COMPLEX).tobytes()

    @classmethod
    def from_bytes(
        cls, payload: bytes, basis: Basis, h: float, grid: Grid1D | None = None
    ) -> OperatorMatrix:
        """Parse the layout written by :meth:`to_bytes`."""
        dim = int(np.frombuffer(payload[: _INDEX.itemsize], dtype=_INDEX)[0])
        entries = np.frombuffer(payload[_INDEX.itemsize :], dtype=_COMPLEX).reshape(dim, dim)
        return cls(entries.astype(np.complex128), basis, h, grid)


def _check_bandwidth(sigma: GridSymbol, h: float) -> Grid1D:
    """Return the position grid after checking the momentum box against h/dx."""
    grid = sigma.position_grid
    expected = h / grid.spacing
    if not math.isclose(sigma.k_grid.extent, expected, rel_tol=GRID_TOLERANCE):
        msg = (
            f"symbol momentum box {sigma.k_grid.extent:.6g} does not match the "
            f"grid bandwidth h/dx = {expected:.6g}"
        )
        raise NyquistError(msg)
    if sigma.k_grid.n_points != grid.n_points:
        msg = "momentum and position grids must have the same number of points"
        raise NyquistError(msg)
    return grid


def _separations(n: int) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.int64]]:
    """Row indices, wrapped separations a − b and column indices, broadcast to (n, n)."""
    rows = np.arange(n)[:, None]
    seps = np.arange(-(n // 2), n // 2)[None, :]
    cols = (rows - seps) % n
    return np.broadcast_to(rows, cols.shape), np.broadcast_to(seps, cols.shape), cols


def _kernel(sigma: GridSymbol, h: float, ordering: Ordering) -> OperatorMatrix:
    h = check_planck(h)
    grid = _check_bandwidth(sigma, h)
    n = grid.n_points
    # (1/N) Σ_j σ_j e^{2πi m j/N}, rows indexed by m mod N
    modes = np.fft.ifft(sigma.values, axis=0)
    rows, seps, cols = _separations(n)
    sign = np.where(seps % 2, -1.0, 1.0)
    if ordering == Ordering.WEYL:
        mids = (2 * rows - seps) % (2 * n)
        values = sign * modes[seps % n, mids]
        nyquist = seps == -(n // 2)
        other = (mids + n) % (2 * n)
        values[nyquist] = 0.5 * (values[nyquist] + (sign * modes[seps % n, other])[nyquist])
    else:
        values = sign * modes[seps % n, 2 * rows]
    operator = np.empty((n, n), dtype=np.complex128)
    operator[rows, cols] = values
    real = bool(np.all(np.isreal(sigma.values)))
    logger.debug("built %s kernel on %d points", ordering.value, n)
    return OperatorMatrix(
        operator / grid.spacing,
        Basis.POSITION_GRID,
        h,
        grid,
        hermitian=real and ordering == Ordering.WEYL,
    )


def weyl_kernel(sigma: GridSymbol, h: float) -> OperatorMatrix:
    """
    The Weyl-quantized operator of a grid symbol.

    Parameters
    ----------
    sigma : GridSymbol
        The symbol, sampled for Planck's constant `h`.
    h : float
        Planck's constant.

    Returns
    -------
    OperatorMatrix
        Kernel values K(x_a, x_b) on the position grid. Real symbols give
        Hermitian operators.

    Raises
    ------
    NyquistError
        If the symbol's momentum box is not the grid bandwidth h/dx.
    """
    return _kernel(sigma, h, Ordering.WEYL)


def kn_kernel(sigma: GridSymbol, h: float) -> OperatorMatrix:
    """
    The Kohn-Nirenberg operator: the symbol is read at the left point x_a.
    """
    return _kernel(sigma, h, Ordering.KOHN_NIRENBERG)


def symbol_from_kernel(
    kernel: OperatorMatrix, h: float, ordering: Ordering = Ordering.WEYL
) -> GridSymbol:
    """
    Recover the grid symbol of a position-grid operator.

    The kernel at separation m is the m-th Fourier mode in k of the symbol,
    known at every other midpoint. Each mode is interpolated spectrally in x
    onto the full midpoint lattice before transforming back over m, which
    inverts :func:`weyl_kernel` (or :func:`kn_kernel`) exactly for symbols
    band-limited below N/2 modes in both variables.

    Raises
    ------
    BasisMismatchError
        If the operator is not on a position grid.
    """
    h = check_planck(h)
    if kernel.basis != Basis.POSITION_GRID or kernel.grid is None:
        msg = f"symbol_from_kernel needs a position-grid operator, got {kernel.basis.value}"
        raise BasisMismatchError(msg)
    grid = kernel.grid
    n = grid.n_points
    matrix = kernel.operator
    seps = np.arange(-(n // 2), n // 2)
    rows = np.arange(n)
    sign = np.where(seps % 2, -1.0, 1.0)[:, None]
    # samples[m, a] sits at x_a − offset·dx
    samples = sign * matrix[rows[None, :], (rows[None, :] - seps[:, None]) % n]
    offset = seps / 2 if ordering == Ordering.WEYL else np.zeros(n)
    phases = TWO_PI * np.fft.fftfreq(n)
    spectrum = np.fft.fft(samples, axis=1)
    modes = np.empty((n, 2 * n), dtype=np.complex128)
    for half_step in (0, 1):
        shift = (offset + half_step / 2)[:, None]
        factor = np.exp(1j * phases[None, :] * shift)
        factor[:, n // 2] = np.cos(phases[n // 2] * shift[:, 0])
        modes[:, half_step::2] = np.fft.ifft(spectrum * factor, axis=1)
    values = np.fft.fft(np.fft.ifftshift(modes, axes=0), axis=0)
    return GridSymbol(values, momentum_grid(grid, h), midpoint_grid(grid))


def apply(kernel: OperatorMatrix, f: ArrayLike) -> NDArray[np.complex128]:
    """
    Apply an operator to a grid function (or eigenbasis coefficients).

    Position-grid kernels use the rectangle rule, ∫K(x,y)f(y)dy ≈ Σ K f dx.

    Raises
    ------
    ShapeMismatchError
        If `f` does not have the operator's dimension.
    """
    values = np.asarray(f, dtype=np.complex128)
    if values.shape[0] != kernel.dim:
        msg = f"function has {values.shape[0]} samples, operator has dimension {kernel.dim}"
        raise ShapeMismatchError(msg)
    return kernel.entries @ values * kernel.weight


def compose(first: OperatorMatrix, second: OperatorMatrix) -> OperatorMatrix:
    """
    The operator product, with the quadrature weight applied once.

    Raises
    ------
    BasisMismatchError
        If the operators live in different bases or on different grids.
    """
    if first.basis != second.basis or first.grid != second.grid:
        msg = "cannot compose operators in different bases"
        raise BasisMismatchError(msg)
    return OperatorMatrix(
        first.entries @ second.entries * first.weight,
        first.basis,
        first.h,
        first.grid,
    )


def _filtered_spectrum(values: NDArray[np.complex128], cutoff: float) -> NDArray[np.complex128]:
    """2-D spectrum without Nyquist modes or modes below `cutoff` times the largest."""
    spectrum = np.fft.fft2(values)
    spectrum[np.abs(spectrum) < cutoff * np.max(np.abs(spectrum))] = 0
    n_k, n_x = spectrum.shape
    spectrum[n_k // 2, :] = 0
    spectrum[:, n_x // 2] = 0
    return spectrum


def grid_star(  # noqa: PLR0913
    sigma: GridSymbol,
    tau: GridSymbol,
    h: float,
    max_order: int = 60,
    tol: float = 1e-15,
    cutoff: float = 1e-13,
) -> GridSymbol:
    """
    Evaluate the Moyal product of two grid symbols through its h-expansion.

    Derivatives are spectral. Fourier modes below `cutoff` relative to the
    largest one are dropped first, since every order multiplies rounding
    noise at wavenumber κ by about ħκ²/2. The series is summed until a term
    falls below `tol` relative to the running result, or `max_order` terms.
    It converges when ħ/2 is small against the squared widths of the symbols.
    """
    h = check_planck(h)
    sigma._check_grids(tau)  # noqa: SLF001
    k_grid, x_grid = sigma.k_grid, sigma.x_grid
    i_k = 1j * k_grid.wavenumbers[:, None]
    i_x = 1j * x_grid.wavenumbers[None, :]
    spectra = {
        id(sigma): _filtered_spectrum(sigma.values, cutoff),
        id(tau): _filtered_spectrum(tau.values, cutoff),
    }

    def partial(symbol: GridSymbol, dx_order: int, dk_order: int) -> NDArray[np.complex128]:
        return np.fft.ifft2(spectra[id(symbol)] * i_x**dx_order * i_k**dk_order)

    result = sigma.values * tau.values
    prefactor = 1j * h / (2 * TWO_PI)
    for order in range(1, max_order + 1):
        term = np.zeros_like(result)
        for m in range(order + 1):
            left = partial(sigma, m, order - m)
            right = partial(tau, order - m, m)
            term += math.comb(order, m) * (-1) ** (order - m) * left * right
        term *= prefactor**order / math.factorial(order)
        result = result + term
        if np.max(np.abs(term)) <= tol * max(np.max(np.abs(result)), 1.0):
            logger.debug("grid star product converged after %d orders", order)
            break
    return GridSymbol(result, k_grid, x_grid)


def harmonic_heat_symbol(beta: float, h: float) -> Callable[[Any, Any], Any]:
    """
    Weyl symbol of exp(−βĤ) for the oscillator Ĥ = (k̂² + x̂²)/2.

    The family satisfies G_β ⋆ G_γ = G_{β+γ} exactly, which makes it an
    independent check of operator composition.

    Examples
    --------
    >>> import math
    >>> g = harmonic_heat_symbol(0.0, 2 * math.pi)
    >>> complex(g(0.3, -1.2))
    (1+0j)
    """
    half = beta * hbar(check_planck(h)) / 2

    def symbol(k: Any, x: Any) -> Any:
        energy = (np.asarray(k) ** 2 + np.asarray(x) ** 2) / 2
        return np.exp(-2 * math.tanh(half) * energy / hbar(h)) / math.cosh(half) + 0j

    return symbol


def eigenbasis(
    kernel: OperatorMatrix, n_states: int
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """
    Lowest eigenpairs of a Hermitian position-grid operator.

    Returns
    -------
    tuple of numpy.ndarray
        Ascending eigenvalues and the matching orthonormal eigenvector columns.
    """
    if not kernel.is_hermitian(1e-10):
        msg = "eigenbasis needs a Hermitian operator"
        raise BasisMismatchError(msg)
    matrix = kernel.operator
    matrix = (matrix + matrix.conj().T) / 2
    values, vectors = linalg.eigh(matrix, subset_by_index=[0, n_states - 1])
    return values, vectors


def ladder_matrices(
    n_states: int, h: float
) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """
    Position and momentum matrices in the first `n_states` oscillator states.

    X = √(ħ/2)(A + A†) and K = i√(ħ/2)(A† − A), with ħ = h/2π. The last row
    and column are only exact for products that stay inside the basis.
    """
    lowering = np.diag(np.sqrt(np.arange(1, n_states, dtype=float)), k=1).astype(np.complex128)
    raising = lowering.conj().T
    scale = math.sqrt(hbar(check_planck(h)) / 2)
    return scale * (lowering + raising), 1j * scale * (raising - lowering)


def fock_matrix(sigma: PolySymbol, n_states: int, h: float) -> OperatorMatrix:
    """
    Weyl-ordered matrix of a quantum polynomial symbol in the oscillator eigenbasis.

    Each monomial x^a k^b maps to 2⁻ᵃ Σ_r C(a, r) X^r K^b X^{a−r}. Products are
    formed in a basis padded by the symbol's degree and then truncated, so
    every returned element is exact.

    Raises
    ------
    VariableError
        If the symbol is not a polynomial in exactly one quantum pair.
    """
    if sigma.context.n_quantum != 1 or sigma.depends_on(Sector.CLASSICAL):
        msg = "fock_matrix needs a symbol in one quantum pair and no classical variables"
        raise VariableError(msg)
    padded = n_states + max(sigma.degree, 0) + 1
    x_mat, k_mat = ladder_matrices(padded, h)
    xs, ks = sigma.context.pairs(Sector.QUANTUM)[0]
    result = np.zeros((padded, padded), dtype=np.complex128)
    for exp, coeff in sigma:
        a, b = exp[xs], exp[ks]
        k_power = np.linalg.matrix_power(k_mat, b)
        term = np.zeros_like(result)
        for r in range(a + 1):
            left = np.linalg.matrix_power(x_mat, r)
            right = np.linalg.matrix_power(x_mat, a - r)
            term += math.comb(a, r) * (left @ k_power @ right)
        result += coeff * term / 2**a
    return OperatorMatrix(
        result[:n_states, :n_states],
        Basis.HO_EIGENBASIS,
        h,
        hermitian=sigma.conj().allclose(sigma),
    )
