# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Mixed quantum-classical propagation.

Three schemes share one Hamiltonian description, an N×N Hermitian matrix of
polynomial symbols in the classical pair (k', x'):

- `MixedDensity` evolves the full Liouville-von Neumann equation for a matrix
  of classical phase-space distributions ρ_ij(k', x') on a periodic grid.
- `MeanFieldState` evolves N amplitudes and a single classical point driven
  by quantum expectation values.
- `MCMFState` evolves a quantum density matrix together with symmetric
  matrices of per-configuration classical points.

Time is Hamilton time. Densities evolve with ∂ρ/∂t = −(2πi/h)·qc(H, ρ), so
with N = 1 the Liouville-von Neumann equation is the classical Liouville
equation ∂ρ/∂t = −(∂H/∂k' ∂ρ/∂x' − ∂H/∂x' ∂ρ/∂k').
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache, singledispatch
from typing import TYPE_CHECKING, Any, TypeVar

import numpy as np
from scipy import linalg

from ._common import HERMITICITY_TOLERANCE, PURITY_THRESHOLD, TWO_PI, check_planck
from .errors import (
    FactorizationError,
    InstabilityError,
    ShapeMismatchError,
    SymmetryError,
    VariableError,
)
from .spectral import Grid1D, derivative
from .symbols import PolySymbol, Sector, SymbolContext
from .weyl import fock_matrix

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence

    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

State = TypeVar("State")

CLASSICAL_CONTEXT = SymbolContext(0, 1)
"""Variable context of Hamiltonian matrix entries: one classical pair."""

DEFAULT_WIDTH_SPACINGS = 4.0
"""Default Gaussian width of grid initial states, in grid spacings."""


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """
    An N×N Hermitian matrix of symbols in the classical variables (k', x').

    Entries are compiled into Σ_m C_m·x'^a·k'^b with constant N×N matrices
    C_m, so every evaluation is a handful of array operations.
    """

    entries: tuple[tuple[PolySymbol, ...], ...]
    """The symbols H_ij, each in the context of one classical pair."""

    def __post_init__(self) -> None:
        rows = tuple(tuple(_classical(symbol) for symbol in row) for row in self.entries)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            msg = "Hamiltonian entries must form a non-empty square matrix"
            raise ShapeMismatchError(msg)
        for i in range(n):
            for j in range(i, n):
                if not rows[i][j].allclose(rows[j][i].conj(), rtol=1e-10, atol=1e-12):
                    msg = f"Hamiltonian entries H[{i}][{j}] and H[{j}][{i}] are not conjugate"
                    raise SymmetryError(msg)
        object.__setattr__(self, "entries", rows)

    @property
    def n_states(self) -> int:
        """Number of quantum basis states N."""
        return len(self.entries)

    @property
    def is_classical_free(self) -> bool:
        """True when no entry depends on (k', x')."""
        return not any(s.depends_on(Sector.CLASSICAL) for row in self.entries for s in row)

    @property
    def is_diagonal(self) -> bool:
        """True when every off-diagonal entry vanishes."""
        n = self.n_states
        return all(self.entries[i][j].is_zero for i in range(n) for j in range(n) if i != j)

    @cached_property
    def d_momentum(self) -> HamiltonianSpec:
        """Entry-wise ∂H/∂k'."""
        return HamiltonianSpec(
            tuple(tuple(s.derivative("k'0") for s in row) for row in self.entries)
        )

    @cached_property
    def d_position(self) -> HamiltonianSpec:
        """Entry-wise ∂H/∂x'."""
        return HamiltonianSpec(
            tuple(tuple(s.derivative("x'0") for s in row) for row in self.entries)
        )

    @cached_property
    def _compiled(self) -> list[tuple[int, int, NDArray[np.complex128]]]:
        """(power of x', power of k', coefficient matrix) per classical monomial."""
        n = self.n_states
        matrices: dict[tuple[int, ...], NDArray[np.complex128]] = {}
        for i, row in enumerate(self.entries):
            for j, symbol in enumerate(row):
                for exp, coeff in symbol:
                    matrix = matrices.setdefault(exp, np.zeros((n, n), dtype=np.complex128))
                    matrix[i, j] = coeff
        return [(exp[0], exp[1], matrices[exp]) for exp in sorted(matrices)]

    def evaluate_entrywise(self, kc: ArrayLike, xc: ArrayLike) -> NDArray[np.complex128]:
        """The matrix with H_ij evaluated at its own point (K_ij, X_ij)."""
        k = np.asarray(kc, dtype=float)
        x = np.asarray(xc, dtype=float)
        result = np.zeros((self.n_states, self.n_states), dtype=np.complex128)
        for x_power, k_power, matrix in self._compiled:
            result = result + matrix * (_power(x, x_power) * _power(k, k_power))
        return result

    def evaluate(self, kc: float, xc: float) -> NDArray[np.complex128]:
        """The N×N matrix H(k', x') at one classical point."""
        shape = (self.n_states, self.n_states)
        return self.evaluate_entrywise(np.full(shape, kc), np.full(shape, xc))

    def sample(self, k: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.complex128]:
        """H on arrays of classical points; shape (N, N, *k.shape)."""
        result = np.zeros((self.n_states, self.n_states, *k.shape), dtype=np.complex128)
        expand = (slice(None), slice(None)) + (None,) * k.ndim
        for x_power, k_power, matrix in self._compiled:
            result += matrix[expand] * (_power(x, x_power) * _power(k, k_power))
        return result

    @lru_cache(maxsize=4)  # noqa: B019
    def on_grid(self, k_grid: Grid1D, x_grid: Grid1D) -> tuple[Any, Any, Any]:
        """
        H, ∂H/∂k' and ∂H/∂x' sampled on a classical grid.

        Each array has shape (N, N, len(k_grid), len(x_grid)).
        """
        k, x = np.meshgrid(k_grid.points, x_grid.points, indexing="ij")
        return self.sample(k, x), self.d_momentum.sample(k, x), self.d_position.sample(k, x)

    def to_json_dict(self) -> dict[str, Any]:
        """Matrix of PolySymbol JSON documents."""
        entries = [[s.to_json_dict() for s in row] for row in self.entries]
        return {"type": "matrix", "entries": entries}

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> HamiltonianSpec:
        """Parse the layout written by :meth:`to_json_dict`."""
        return cls(
            tuple(tuple(PolySymbol.from_json_dict(s) for s in row) for row in data["entries"])
        )

    @classmethod
    def from_matrix(cls, matrix: ArrayLike) -> HamiltonianSpec:
        """A classical-variable-free Hamiltonian from a constant Hermitian matrix."""
        values = np.asarray(matrix, dtype=np.complex128)
        return cls(
            tuple(
                tuple(PolySymbol.constant(CLASSICAL_CONTEXT, complex(v)) for v in row)
                for row in values
            )
        )

    @classmethod
    def from_symbol(cls, sigma: PolySymbol, n_states: int, h: float) -> HamiltonianSpec:
        """
        Project a mixed symbol onto the lowest `n_states` oscillator states.

        The symbol is grouped by classical monomial; each quantum factor is
        Weyl-quantized in the oscillator eigenbasis.

        Raises
        ------
        VariableError
            If the symbol does not have exactly one quantum and one classical pair.
        """
        context = sigma.context
        if context.n_quantum != 1 or context.n_classical != 1:
            msg = "from_symbol needs a symbol in one quantum and one classical pair"
            raise VariableError(msg)
        split = 2 * context.n_quantum
        groups: dict[tuple[int, ...], dict[tuple[int, ...], complex]] = {}
        for exp, coeff in sigma:
            quantum = exp[:split] + (0,) * (len(exp) - split)
            groups.setdefault(exp[split:], {})[quantum] = coeff
        terms: list[list[dict[tuple[int, ...], complex]]] = [
            [{} for _ in range(n_states)] for _ in range(n_states)
        ]
        for classical_exp, quantum_terms in groups.items():
            matrix = fock_matrix(PolySymbol(quantum_terms, context), n_states, h).entries
            for i, j in zip(*np.nonzero(matrix)):
                terms[i][j][classical_exp] = complex(matrix[i, j])
        logger.debug("projected Hamiltonian onto %d oscillator states", n_states)
        return cls(
            tuple(tuple(PolySymbol(cell, CLASSICAL_CONTEXT) for cell in row) for row in terms)
        )


def _classical(symbol: PolySymbol) -> PolySymbol:
    """Move a quantum-free symbol into the one-classical-pair context."""
    if symbol.context == CLASSICAL_CONTEXT:
        return symbol
    if symbol.context.n_classical != 1 or symbol.depends_on(Sector.QUANTUM):
        msg = "Hamiltonian entries must be symbols in one classical pair only"
        raise VariableError(msg)
    offset = 2 * symbol.context.n_quantum
    return PolySymbol({exp[offset:]: c for exp, c in symbol}, CLASSICAL_CONTEXT)


def _power(values: NDArray[np.float64], exponent: int) -> NDArray[np.float64]:
    """values**exponent by repeated multiplication, identical for every array shape."""
    result = np.ones_like(values)
    for _ in range(exponent):
        result = result * values
    return result


def _matmul(a: NDArray[np.complex128], b: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Matrix product over the state axes, pointwise over the grid axes."""
    return np.einsum("ik...,kj...->ij...", a, b)


@dataclass(frozen=True, eq=False)
class MixedDensity:
    """
    Matrix of classical phase-space distributions ρ_ij(k', x').
    """

    rho: NDArray[np.complex128]
    """Array of shape (N, N, len(k_grid), len(x_grid))."""
    k_grid: Grid1D = field(metadata={"static": True})
    """Classical momentum grid."""
    x_grid: Grid1D = field(metadata={"static": True})
    """Classical position grid."""

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=np.complex128)
        if rho.ndim != 4 or rho.shape[0] != rho.shape[1]:  # noqa: PLR2004
            msg = f"densities need shape (N, N, Nk, Nx), got {rho.shape}"
            raise ShapeMismatchError(msg)
        if rho.shape[2:] != (self.k_grid.n_points, self.x_grid.n_points):
            msg = f"density grid axes {rho.shape[2:]} do not match the grids"
            raise ShapeMismatchError(msg)
        object.__setattr__(self, "rho", rho)

    @property
    def n_states(self) -> int:
        """Number of quantum basis states."""
        return int(self.rho.shape[0])

    @property
    def cell(self) -> float:
        """Quadrature weight dk'·dx'."""
        return self.k_grid.spacing * self.x_grid.spacing

    def integrated(self) -> NDArray[np.complex128]:
        """The quantum density matrix D_ij = ∬ρ_ij dk' dx'."""
        return np.sum(self.rho, axis=(2, 3)) * self.cell

    def trace(self) -> float:
        """Σ_i ∬ρ_ii dk' dx'."""
        return float(np.real(np.trace(self.integrated())))

    def hermiticity_error(self) -> float:
        """Largest pointwise |ρ_ij − conj(ρ_ji)|."""
        return float(np.max(np.abs(self.rho - np.conj(np.swapaxes(self.rho, 0, 1)))))

    def moments(self) -> tuple[float, float, float, float]:
        """
        Mean and variance of k' and x' under the marginal Σ_i ρ_ii.

        The moments are not divided by the trace. A density too large to
        square gives infinite variances instead of raising.
        """
        marginal = np.real(np.einsum("ii...->...", self.rho)) * self.cell
        k, x = np.meshgrid(self.k_grid.points, self.x_grid.points, indexing="ij")
        with np.errstate(over="ignore", invalid="ignore"):
            mean_k = np.sum(k * marginal)
            mean_x = np.sum(x * marginal)
            var_k = np.sum(np.square(k) * marginal) - np.square(mean_k)
            var_x = np.sum(np.square(x) * marginal) - np.square(mean_x)
        return float(mean_k), float(mean_x), float(var_k), float(var_x)

    def centroid(self, index: int) -> tuple[float, float]:
        """Normalized centre (k', x') of the single distribution ρ_ii."""
        weight = np.real(self.rho[index, index])
        k, x = np.meshgrid(self.k_grid.points, self.x_grid.points, indexing="ij")
        total = float(np.sum(weight))
        return float(np.sum(k * weight)) / total, float(np.sum(x * weight)) / total

    @classmethod
    def product(
        cls,
        density: ArrayLike,
        kc: float,
        xc: float,
        k_grid: Grid1D,
        x_grid: Grid1D,
        width: float | tuple[float, float] | None = None,
    ) -> MixedDensity:
        """
        A quantum density matrix times a normalized classical Gaussian.

        Parameters
        ----------
        density : array_like
            N×N quantum density matrix.
        kc, xc : float
            Centre of the classical Gaussian.
        k_grid, x_grid : Grid1D
            Classical grids.
        width : float or pair of float, optional
            Standard deviations in k' and x'. Four grid spacings per axis by default.
        """
        if width is None:
            widths = (
                DEFAULT_WIDTH_SPACINGS * k_grid.spacing,
                DEFAULT_WIDTH_SPACINGS * x_grid.spacing,
            )
        elif isinstance(width, tuple):
            widths = width
        else:
            widths = (float(width), float(width))
        k, x = np.meshgrid(k_grid.points, x_grid.points, indexing="ij")
        blob = np.exp(
            -((k - kc) ** 2) / (2 * widths[0] ** 2) - (x - xc) ** 2 / (2 * widths[1] ** 2)
        )
        blob /= np.sum(blob) * k_grid.spacing * x_grid.spacing
        matrix = np.asarray(density, dtype=np.complex128)
        return cls(matrix[:, :, None, None] * blob[None, None, :, :], k_grid, x_grid)

    @classmethod
    def gaussian(
        cls,
        amplitudes: ArrayLike,
        kc: float,
        xc: float,
        k_grid: Grid1D,
        x_grid: Grid1D,
        width: float | tuple[float, float] | None = None,
    ) -> MixedDensity:
        """A pure quantum state times a normalized classical Gaussian."""
        c = np.asarray(amplitudes, dtype=np.complex128)
        c = c / np.linalg.norm(c)
        return cls.product(np.outer(c, c.conj()), kc, xc, k_grid, x_grid, width)


@dataclass(frozen=True, eq=False)
class MeanFieldState:
    """
    Quantum amplitudes and one classical phase point.
    """

    c: NDArray[np.complex128]
    """Amplitudes over the N basis states."""
    kc: float
    """Classical momentum k'."""
    xc: float
    """Classical position x'."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", np.asarray(self.c, dtype=np.complex128))

    @property
    def norm_error(self) -> float:
        """|Σ|c_i|² − 1|."""
        return abs(float(np.sum(np.abs(self.c) ** 2)) - 1.0)

    @classmethod
    def pure(cls, n_states: int, index: int, kc: float, xc: float) -> MeanFieldState:
        """Basis state `index` at the classical point (kc, xc)."""
        c = np.zeros(n_states, dtype=np.complex128)
        c[index] = 1.0
        return cls(c, kc, xc)


@dataclass(frozen=True, eq=False)
class MCMFState:
    """
    Quantum density matrix and symmetric matrices of classical points.
    """

    varrho: NDArray[np.complex128]
    """N×N quantum density matrix."""
    kc: NDArray[np.float64]
    """Symmetric N×N matrix of classical momenta k'_ij."""
    xc: NDArray[np.float64]
    """Symmetric N×N matrix of classical positions x'_ij."""

    def __post_init__(self) -> None:
        varrho = np.asarray(self.varrho, dtype=np.complex128)
        kc = np.asarray(self.kc, dtype=float)
        xc = np.asarray(self.xc, dtype=float)
        n = varrho.shape[0]
        if varrho.shape != (n, n) or kc.shape != (n, n) or xc.shape != (n, n):
            msg = "MCMF arrays must all be N×N"
            raise ShapeMismatchError(msg)
        object.__setattr__(self, "varrho", varrho)
        object.__setattr__(self, "kc", kc)
        object.__setattr__(self, "xc", xc)

    @property
    def n_states(self) -> int:
        """Number of configurations."""
        return int(self.varrho.shape[0])

    def check_symmetric(self, tol: float = 1e-12) -> None:
        """
        Raise SymmetryError unless the classical matrices are symmetric.
        """
        for name, matrix in (("k'", self.kc), ("x'", self.xc)):
            scale = max(float(np.max(np.abs(matrix))), 1.0)
            if float(np.max(np.abs(matrix - matrix.T))) > tol * scale:
                msg = f"the classical {name} matrix is not symmetric"
                raise SymmetryError(msg)

    @classmethod
    def from_meanfield(cls, state: MeanFieldState) -> MCMFState:
        """Every configuration starts at the mean-field point; ϱ = c c†."""
        n = state.c.size
        return cls(
            np.outer(state.c, state.c.conj()),
            np.full((n, n), state.kc),
            np.full((n, n), state.xc),
        )


def lvn_rhs(
    rho: MixedDensity, hamiltonian: HamiltonianSpec, h: float, *, symmetrize: bool = True
) -> MixedDensity:
    """
    Right-hand side of the Liouville-von Neumann equation.

    Parameters
    ----------
    rho : MixedDensity
        Current state.
    hamiltonian : HamiltonianSpec
        N×N matrix of classical symbols.
    h : float
        Planck's constant.
    symmetrize : bool, optional
        Use the symmetrized derivative coupling ½(H_k'ρ_x' + ρ_x'H_k' −
        H_x'ρ_k' − ρ_k'H_x'), which preserves Hermiticity and trace for any
        H. With ``False`` the coupling is H_k'ρ_x' − ρ_k'H_x'; both agree
        whenever the matrices commute.

    Notes
    -----
    With the symmetrized coupling the rate of ⟨H⟩ is an integral of a total
    derivative, so energy is conserved exactly for the continuous equation.
    On the grid the derivatives of ρ are spectral while H is sampled, and
    energy is conserved only to the accuracy with which the grid resolves ρ,
    including the phase structure of its coherences. A density that reaches
    the box edge, or coherences whose phase varies faster than the grid
    spacing, show up as energy drift.

    Returns
    -------
    MixedDensity
        The time derivative, on the same grids.

    Raises
    ------
    ShapeMismatchError
        If the state and the Hamiltonian have different numbers of states.
    """
    h = check_planck(h)
    if rho.n_states != hamiltonian.n_states:
        msg = f"density has {rho.n_states} states, Hamiltonian has {hamiltonian.n_states}"
        raise ShapeMismatchError(msg)
    h_grid, h_k, h_x = hamiltonian.on_grid(rho.k_grid, rho.x_grid)
    rho_k = derivative(rho.rho, rho.k_grid, axis=2)
    rho_x = derivative(rho.rho, rho.x_grid, axis=3)
    quantum = -(TWO_PI * 1j / h) * (_matmul(h_grid, rho.rho) - _matmul(rho.rho, h_grid))
    if symmetrize:
        coupling = 0.5 * (
            _matmul(h_k, rho_x) + _matmul(rho_x, h_k) - _matmul(h_x, rho_k) - _matmul(rho_k, h_x)
        )
    else:
        coupling = _matmul(h_k, rho_x) - _matmul(rho_k, h_x)
    return MixedDensity(quantum - coupling, rho.k_grid, rho.x_grid)


def von_neumann_rhs(
    density: NDArray[np.complex128], matrix: NDArray[np.complex128], h: float
) -> NDArray[np.complex128]:
    """Dense von Neumann right-hand side −(2πi/h)[H, D]."""
    return -(TWO_PI * 1j / check_planck(h)) * (matrix @ density - density @ matrix)


def mf_rhs(state: MeanFieldState, hamiltonian: HamiltonianSpec, h: float) -> MeanFieldState:
    """
    Right-hand side of the mean-field equations.

    The amplitudes follow −(2πi/h)(H(k', x') − E)c with E = Re(c†Hc), which
    differs from the plain Schrödinger form only by a global phase. The
    classical point follows Hamilton's equations for E(k', x').
    """
    h = check_planck(h)
    if state.c.size != hamiltonian.n_states:
        msg = f"state has {state.c.size} amplitudes, Hamiltonian has {hamiltonian.n_states} states"
        raise ShapeMismatchError(msg)
    c = state.c
    matrix = hamiltonian.evaluate(state.kc, state.xc)
    d_k = hamiltonian.d_momentum.evaluate(state.kc, state.xc)
    d_x = hamiltonian.d_position.evaluate(state.kc, state.xc)
    energy = float(np.real(c.conj() @ matrix @ c))
    dc = -(TWO_PI * 1j / h) * (matrix @ c - energy * c)
    dkc = -float(np.real(c.conj() @ d_x @ c))
    dxc = float(np.real(c.conj() @ d_k @ c))
    return MeanFieldState(dc, dkc, dxc)


def mcmf_rhs(state: MCMFState, hamiltonian: HamiltonianSpec, h: float) -> MCMFState:
    """
    Right-hand side of the multiconfiguration mean-field equations.

    G_ij = H_ij(k'_ij, x'_ij) drives ϱ by −(2πi/h)(Gϱ − ϱG). Off-diagonal
    points move with the average of the two diagonal velocities. The
    diagonal point i follows the force of its own surface plus the
    coherence-weighted coupling forces, normalized by its population:

        dk'_ii/dt = −Re ∂H_ii/∂x' − Σ_{j≠i} Re(ϱ_ji ∂H_ij/∂x') / ϱ_ii
        dx'_ii/dt = Re ∂H_ii/∂k' + Σ_{j≠i} Re(ϱ_ji ∂H_ij/∂k') / ϱ_ii

    with every derivative taken at (k'_ij, x'_ij). This keeps Re Tr(ϱG)
    constant, reduces to independent mean-field trajectories when H is
    diagonal and to mean field for a single configuration. The coherence
    term is dropped for configurations with no population.

    Raises
    ------
    SymmetryError
        If the classical matrices are not symmetric.
    """
    h = check_planck(h)
    if state.n_states != hamiltonian.n_states:
        msg = f"state has {state.n_states} configurations, Hamiltonian has {hamiltonian.n_states}"
        raise ShapeMismatchError(msg)
    state.check_symmetric()
    effective = hamiltonian.evaluate_entrywise(state.kc, state.xc)
    d_k = hamiltonian.d_momentum.evaluate_entrywise(state.kc, state.xc)
    d_x = hamiltonian.d_position.evaluate_entrywise(state.kc, state.xc)
    d_varrho = -(TWO_PI * 1j / h) * (effective @ state.varrho - state.varrho @ effective)
    populations = np.real(np.diag(state.varrho))
    diag_k = -(np.real(np.diag(d_x)) + _coherence_force(state.varrho, d_x, populations))
    diag_x = np.real(np.diag(d_k)) + _coherence_force(state.varrho, d_k, populations)
    dkc = 0.5 * (diag_k[:, None] + diag_k[None, :])
    dxc = 0.5 * (diag_x[:, None] + diag_x[None, :])
    n = state.n_states
    dkc[np.arange(n), np.arange(n)] = diag_k
    dxc[np.arange(n), np.arange(n)] = diag_x
    return MCMFState(d_varrho, dkc, dxc)


def _coherence_force(
    varrho: NDArray[np.complex128],
    slope: NDArray[np.complex128],
    populations: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Σ_{j≠i} Re(ϱ_ji ∂H_ij) / ϱ_ii, zero where ϱ_ii ≤ 0."""
    weighted = np.real(varrho.T * slope)
    np.fill_diagonal(weighted, 0.0)
    return np.divide(
        weighted.sum(axis=1),
        populations,
        out=np.zeros_like(populations),
        where=populations > 0,
    )


def _is_dynamic(item: dataclasses.Field[Any]) -> bool:
    return item.init and not item.metadata.get("static", False)


def _axpy(state: State, increment: State, factor: float) -> State:
    """state + factor·increment, field by field."""
    return dataclasses.replace(
        state,  # type: ignore[type-var]
        **{
            f.name: getattr(state, f.name) + getattr(increment, f.name) * factor
            for f in dataclasses.fields(state)  # type: ignore[arg-type]
            if _is_dynamic(f)
        },
    )


def step_rk4(state: State, rhs_fn: Callable[[State], State], dt: float) -> State:
    """
    One classical fourth-order Runge-Kutta step for a dataclass state.

    Every field not marked static must support addition and scaling.
    """
    k1 = rhs_fn(state)
    k2 = rhs_fn(_axpy(state, k1, dt / 2))
    k3 = rhs_fn(_axpy(state, k2, dt / 2))
    k4 = rhs_fn(_axpy(state, k3, dt))
    return dataclasses.replace(
        state,  # type: ignore[type-var]
        **{
            f.name: getattr(state, f.name)
            + (
                getattr(k1, f.name)
                + 2 * getattr(k2, f.name)
                + 2 * getattr(k3, f.name)
                + getattr(k4, f.name)
            )
            * (dt / 6)
            for f in dataclasses.fields(state)  # type: ignore[arg-type]
            if _is_dynamic(f)
        },
    )


def is_finite(state: Any) -> bool:
    """True if every numeric field of a dataclass state is finite."""
    return all(
        bool(np.all(np.isfinite(getattr(state, f.name))))
        for f in dataclasses.fields(state)
        if _is_dynamic(f)
    )


@dataclass(frozen=True)
class ObservableRecord:
    """
    One row of the observable time series.
    """

    t: float
    """Time."""
    trace: float
    """Trace of the density, or the squared norm of the amplitudes."""
    energy: float
    """Expectation value of the Hamiltonian."""
    populations: tuple[float, ...]
    """Quantum populations, one per basis state."""
    mean_k: float
    """Mean classical momentum."""
    mean_x: float
    """Mean classical position."""
    var_k: float
    """Variance of the classical momentum."""
    var_x: float
    """Variance of the classical position."""

    def is_finite(self) -> bool:
        """True if no value in the row is NaN or infinite."""
        values = (self.trace, self.energy, self.mean_k, self.mean_x, self.var_k, self.var_x)
        return bool(np.all(np.isfinite([*values, *self.populations])))


@singledispatch
def observables(state: Any, hamiltonian: HamiltonianSpec, t: float = 0.0) -> ObservableRecord:
    """
    Read the observables of a state.

    Raises
    ------
    TypeError
        If the state type is not one of the three propagated states.
    """
    msg = f"no observables for {type(state).__name__}"
    raise TypeError(msg)


@observables.register(MixedDensity)
def _(state: MixedDensity, hamiltonian: HamiltonianSpec, t: float = 0.0) -> ObservableRecord:
    h_grid, _, _ = hamiltonian.on_grid(state.k_grid, state.x_grid)
    cell = state.cell
    energy = float(np.real(np.sum(np.einsum("ij...,ji...->...", h_grid, state.rho)))) * cell
    diagonal = np.real(np.einsum("ii...->i...", state.rho))
    populations = tuple(float(v) for v in np.sum(diagonal, axis=(1, 2)) * cell)
    mean_k, mean_x, var_k, var_x = state.moments()
    return ObservableRecord(
        t, float(sum(populations)), energy, populations, mean_k, mean_x, var_k, var_x
    )


@observables.register(MeanFieldState)
def _(state: MeanFieldState, hamiltonian: HamiltonianSpec, t: float = 0.0) -> ObservableRecord:
    matrix = hamiltonian.evaluate(state.kc, state.xc)
    populations = tuple(float(v) for v in np.abs(state.c) ** 2)
    return ObservableRecord(
        t,
        float(sum(populations)),
        float(np.real(state.c.conj() @ matrix @ state.c)),
        populations,
        float(state.kc),
        float(state.xc),
        0.0,
        0.0,
    )


@observables.register(MCMFState)
def _(state: MCMFState, hamiltonian: HamiltonianSpec, t: float = 0.0) -> ObservableRecord:
    effective = hamiltonian.evaluate_entrywise(state.kc, state.xc)
    weights = np.real(np.diag(state.varrho))
    k_diag = np.diag(state.kc)
    x_diag = np.diag(state.xc)
    with np.errstate(over="ignore", invalid="ignore"):
        mean_k = np.sum(weights * k_diag)
        mean_x = np.sum(weights * x_diag)
        var_k = np.sum(weights * np.square(k_diag)) - np.square(mean_k)
        var_x = np.sum(weights * np.square(x_diag)) - np.square(mean_x)
    return ObservableRecord(
        t,
        float(np.real(np.trace(state.varrho))),
        float(np.real(np.trace(state.varrho @ effective))),
        tuple(float(v) for v in weights),
        float(mean_k),
        float(mean_x),
        float(var_k),
        float(var_x),
    )


@singledispatch
def rhs_for(state: Any, hamiltonian: HamiltonianSpec, h: float) -> Callable[[Any], Any]:
    """The right-hand side function matching a state type."""
    msg = f"cannot propagate {type(state).__name__}"
    raise TypeError(msg)


@rhs_for.register(MixedDensity)
def _(state: MixedDensity, hamiltonian: HamiltonianSpec, h: float) -> Callable[[Any], Any]:
    return lambda s: lvn_rhs(s, hamiltonian, h)


@rhs_for.register(MeanFieldState)
def _(state: MeanFieldState, hamiltonian: HamiltonianSpec, h: float) -> Callable[[Any], Any]:
    return lambda s: mf_rhs(s, hamiltonian, h)


@rhs_for.register(MCMFState)
def _(state: MCMFState, hamiltonian: HamiltonianSpec, h: float) -> Callable[[Any], Any]:
    return lambda s: mcmf_rhs(s, hamiltonian, h)


@dataclass
class TimeSeries:
    """
    Result of a propagation.
    """

    records: list[ObservableRecord] = field(default_factory=list)
    """Observables at t = 0 and after every step."""
    snapshots: list[tuple[int, float, Any]] = field(default_factory=list)
    """(step, time, state) at the snapshot stride."""
    final: Any = None
    """The state after the last step."""

    def column(self, name: str) -> NDArray[np.float64]:
        """One scalar observable as an array over time."""
        return np.array([getattr(record, name) for record in self.records], dtype=float)

    def drift(self, name: str) -> float:
        """Largest deviation of a scalar observable from its initial value."""
        values = self.column(name)
        return float(np.max(np.abs(values - values[0]))) if values.size else 0.0


def propagate(  # noqa: PLR0913
    state: State,
    hamiltonian: HamiltonianSpec,
    h: float,
    dt: float,
    n_steps: int,
    *,
    observers: Sequence[Callable[[float, Any], None]] = (),
    snapshot_stride: int = 0,
    rhs: Callable[[State], State] | None = None,
) -> TimeSeries:
    """
    Propagate a state with fixed-step RK4.

    Invariants are measured, never enforced: nothing is renormalized.

    Parameters
    ----------
    state : MixedDensity, MeanFieldState or MCMFState
        Initial state.
    hamiltonian : HamiltonianSpec
        The Hamiltonian matrix.
    h : float
        Planck's constant.
    dt : float
        Time step, positive.
    n_steps : int
        Number of steps.
    observers : sequence of callables, optional
        Called as ``observer(t, state)`` at t = 0 and after every step.
    snapshot_stride : int, optional
        Keep every `snapshot_stride`-th state (and the initial one); 0 keeps none.
    rhs : callable, optional
        Override the right-hand side chosen for the state type.

    Returns
    -------
    TimeSeries
        Observables after every step, snapshots and the final state.

    Raises
    ------
    InstabilityError
        If a step produces NaN or infinite values, in the state or in its
        observables.
    """
    if not dt > 0:
        msg = f"time step must be positive, got {dt}"
        raise ValueError(msg)
    h = check_planck(h)
    rhs_fn = rhs if rhs is not None else rhs_for(state, hamiltonian, h)
    series = TimeSeries()

    def record(step: int, current: State) -> None:
        t = step * dt
        with np.errstate(over="ignore", invalid="ignore"):
            row = observables(current, hamiltonian, t)
        if not row.is_finite():
            logger.error("observables overflowed at step %d", step)
            raise InstabilityError(step, t)
        series.records.append(row)
        for observer in observers:
            observer(t, current)
        if snapshot_stride and step % snapshot_stride == 0:
            series.snapshots.append((step, t, current))

    record(0, state)
    for step in range(1, n_steps + 1):
        state = step_rk4(state, rhs_fn, dt)
        if not is_finite(state):
            logger.error("propagation became unstable at step %d", step)
            raise InstabilityError(step, step * dt)
        record(step, state)
        if step % max(n_steps // 10, 1) == 0:
            logger.debug("step %d of %d", step, n_steps)
    series.final = state
    logger.info("propagated %d steps of %.6g", n_steps, dt)
    return series


def constrain_to_meanfield(
    rho: MixedDensity, threshold: float = PURITY_THRESHOLD
) -> MeanFieldState:
    """
    Reduce a factorized density to a mean-field state.

    The amplitudes are the dominant eigenvector of the integrated density
    matrix, with the phase fixed so the largest component is real and
    positive; the classical point is the centroid of Σ_i ρ_ii.

    Raises
    ------
    FactorizationError
        If the quantum purity Tr(D²)/Tr(D)² is below `threshold`.
    """
    density = rho.integrated()
    trace = float(np.real(np.trace(density)))
    purity = float(np.real(np.trace(density @ density))) / trace**2
    if purity < threshold:
        raise FactorizationError(purity, threshold)
    hermitian = (density + density.conj().T) / 2
    _, vectors = linalg.eigh(hermitian)
    c = vectors[:, -1]
    lead = int(np.argmax(np.abs(c)))
    c = c * (abs(c[lead]) / c[lead])
    mean_k, mean_x, _, _ = rho.moments()
    return MeanFieldState(c, mean_k / trace, mean_x / trace)


def conservation_report(series: TimeSeries, hermiticity: float | None = None) -> dict[str, float]:
    """
    Drift of the conserved quantities over a run.

    Keys are ``trace_drift``, ``energy_drift``, ``relative_energy_drift`` and,
    when given, ``hermiticity``.
    """
    energy = series.column("energy")
    scale = max(abs(float(energy[0])), 1.0) if energy.size else 1.0
    report = {
        "trace_drift": series.drift("trace"),
        "energy_drift": series.drift("energy"),
        "relative_energy_drift": series.drift("energy") / scale,
    }
    if hermiticity is not None:
        report["hermiticity"] = hermiticity
        if hermiticity > HERMITICITY_TOLERANCE:
            logger.warning(
                "Hermiticity violation %.3g exceeds %.3g", hermiticity, HERMITICITY_TOLERANCE
            )
    return report


def final_hermiticity(state: Any) -> float:
    """Hermiticity violation of a final state (0 for mean-field states)."""
    if isinstance(state, MixedDensity):
        return state.hermiticity_error()
    if isinstance(state, MCMFState):
        return float(np.max(np.abs(state.varrho - state.varrho.conj().T)))
    return 0.0


def sample_times(dt: float, n_steps: int) -> Iterable[float]:
    """Times 0, dt, …, n_steps·dt."""
    return (step * dt for step in range(n_steps + 1))


def steps_per_period(dt: float, frequency: float) -> float:
    """Number of steps resolving one period of an angular frequency."""
    return math.inf if frequency == 0 else TWO_PI / (abs(frequency) * dt)
