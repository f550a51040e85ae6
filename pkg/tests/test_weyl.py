# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Tests for grid kernels and the oscillator eigenbasis.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from qcbracket.errors import (
    BasisMismatchError,
    NyquistError,
    ShapeMismatchError,
    VariableError,
)
from qcbracket.identities import COMPOSITION_H, composition_error
from qcbracket.oscillator import oscillator_levels
from qcbracket.spectral import Grid1D
from qcbracket.symbols import PolySymbol, SymbolContext
from qcbracket.weyl import (
    Basis,
    GridSymbol,
    OperatorMatrix,
    Ordering,
    apply,
    compose,
    eigenbasis,
    fock_matrix,
    grid_star,
    harmonic_heat_symbol,
    kn_kernel,
    ladder_matrices,
    midpoint_grid,
    momentum_grid,
    symbol_from_kernel,
    weyl_kernel,
)

H = 1.0
GRID = Grid1D(32, 8.0)


def band_limited(grid: Grid1D, h: float):
    """A symbol with a handful of Fourier modes in both variables."""
    k_extent = h / grid.spacing
    length = grid.extent

    def symbol(k, x):
        return (
            1.0
            + 0.5 * np.cos(2 * np.pi * x / length) * np.cos(2 * np.pi * k / k_extent)
            + 0.25j * np.sin(4 * np.pi * x / length)
            + 0.1 * np.sin(2 * np.pi * 3 * k / k_extent)
        )

    return symbol


def test_unit_symbol_is_identity() -> None:
    sigma = GridSymbol.from_function(lambda k, x: np.ones_like(k), GRID, H)
    np.testing.assert_allclose(weyl_kernel(sigma, H).operator, np.eye(GRID.n_points), atol=1e-12)


def test_position_symbol_is_diagonal() -> None:
    sigma = GridSymbol.from_function(lambda k, x: np.cos(x) + 0 * k, GRID, H)
    operator = weyl_kernel(sigma, H).operator
    np.testing.assert_allclose(operator, np.diag(np.cos(GRID.points)), atol=1e-12)


def test_real_symbols_give_hermitian_kernels() -> None:
    def bump(k, x):
        return np.exp(-(k**2) - (x - 0.3) ** 2 + k * x)

    sigma = GridSymbol.from_function(bump, GRID, H)
    kernel = weyl_kernel(sigma, H)
    assert kernel.hermitian
    assert kernel.is_hermitian()


@pytest.mark.parametrize("ordering", [Ordering.WEYL, Ordering.KOHN_NIRENBERG])
def test_band_limited_round_trip(ordering: Ordering) -> None:
    sigma = GridSymbol.from_function(band_limited(GRID, H), GRID, H)
    build = weyl_kernel if ordering == Ordering.WEYL else kn_kernel
    recovered = symbol_from_kernel(build(sigma, H), H, ordering)
    np.testing.assert_allclose(recovered.values, sigma.values, atol=1e-10)


def test_kernel_needs_matching_bandwidth() -> None:
    sigma = GridSymbol.from_function(lambda k, x: np.ones_like(k), GRID, 1.0)
    with pytest.raises(NyquistError):
        weyl_kernel(sigma, 2.0)


def test_inverse_needs_position_grid() -> None:
    matrix = OperatorMatrix(np.eye(4), Basis.HO_EIGENBASIS, H)
    with pytest.raises(BasisMismatchError):
        symbol_from_kernel(matrix, H)


def test_apply_uses_rectangle_rule() -> None:
    sigma = GridSymbol.from_function(lambda k, x: x + 0 * k, GRID, H)
    f = np.exp(-(GRID.points**2))
    np.testing.assert_allclose(apply(weyl_kernel(sigma, H), f), GRID.points * f, atol=1e-12)


def test_heat_kernels_compose() -> None:
    grid = Grid1D(256, 16.0)
    h = COMPOSITION_H
    first = GridSymbol.from_function(harmonic_heat_symbol(1.0, h), grid, h)
    second = GridSymbol.from_function(harmonic_heat_symbol(1.5, h), grid, h)
    product = GridSymbol.from_function(harmonic_heat_symbol(2.5, h), grid, h)
    assert composition_error(first, second, product, h) < 1e-6


def test_composition_error_falls_with_refinement() -> None:
    h = COMPOSITION_H
    errors = []
    for n_points in (64, 256):
        grid = Grid1D(n_points, 16.0)
        first = GridSymbol.from_function(harmonic_heat_symbol(1.0, h), grid, h)
        second = GridSymbol.from_function(harmonic_heat_symbol(1.0, h), grid, h)
        product = GridSymbol.from_function(harmonic_heat_symbol(2.0, h), grid, h)
        errors.append(composition_error(first, second, product, h))
    assert errors[1] < errors[0]


def test_grid_star_matches_composition() -> None:
    grid = Grid1D(256, 16.0)
    h = COMPOSITION_H

    def gaussian(k0: float, x0: float, width: float):
        return lambda k, x: np.exp(-((k - k0) ** 2 + (x - x0) ** 2) / (2 * width**2) + 0.3j * k)

    sigma = GridSymbol.from_function(gaussian(0.2, -0.1, 0.8), grid, h)
    tau = GridSymbol.from_function(gaussian(-0.3, 0.4, 0.7), grid, h)
    assert composition_error(sigma, tau, grid_star(sigma, tau, h), h) < 1e-6


def test_grid_oscillator_spectrum() -> None:
    h = 2 * math.pi
    grid = Grid1D(64, 20.0)
    sigma = GridSymbol.from_function(lambda k, x: (k**2 + x**2) / 2, grid, h)
    values, vectors = eigenbasis(weyl_kernel(sigma, h), 4)
    np.testing.assert_allclose(values, oscillator_levels(4, h), atol=1e-6)
    np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(4), atol=1e-10)


def test_fock_matrix_of_oscillator_is_diagonal() -> None:
    context = SymbolContext(1, 0)
    x, k = PolySymbol.variable(context, "x0"), PolySymbol.variable(context, "k0")
    h = 2 * math.pi
    matrix = fock_matrix((x**2 + k**2) * 0.5, 6, h)
    assert matrix.basis == Basis.HO_EIGENBASIS
    np.testing.assert_allclose(matrix.entries, np.diag(oscillator_levels(6, h)), atol=1e-12)


def test_fock_matrix_of_weyl_product() -> None:
    # the Weyl symbol xk is the operator (XK + KX)/2
    context = SymbolContext(1, 0)
    x, k = PolySymbol.variable(context, "x0"), PolySymbol.variable(context, "k0")
    h = 1.7
    x_mat, k_mat = ladder_matrices(12, h)
    expected = ((x_mat @ k_mat + k_mat @ x_mat) / 2)[:8, :8]
    np.testing.assert_allclose(fock_matrix(x * k, 8, h).entries, expected, atol=1e-12)


def test_fock_matrix_rejects_classical_symbols() -> None:
    xc = PolySymbol.variable(SymbolContext(1, 1), "x'0")
    with pytest.raises(VariableError):
        fock_matrix(xc, 4, 1.0)


def test_grids_for_a_kernel() -> None:
    k_grid = momentum_grid(GRID, H)
    assert k_grid.n_points == GRID.n_points
    assert k_grid.extent == pytest.approx(H / GRID.spacing)
    lattice = midpoint_grid(GRID)
    assert lattice.n_points == 2 * GRID.n_points
    assert lattice.spacing == pytest.approx(GRID.spacing / 2)


def test_symbol_samples_need_matching_shape() -> None:
    with pytest.raises(ShapeMismatchError):
        GridSymbol(np.zeros((8, 8)), Grid1D(8, 1.0), Grid1D(8, 1.0))


def test_from_poly_samples_the_polynomial() -> None:
    context = SymbolContext(1, 0)
    x, k = PolySymbol.variable(context, "x0"), PolySymbol.variable(context, "k0")
    sampled = GridSymbol.from_poly(x * k + 2, GRID, H)
    k_mesh, x_mesh = sampled.mesh
    np.testing.assert_allclose(sampled.values, x_mesh * k_mesh + 2)
    with pytest.raises(VariableError):
        GridSymbol.from_poly(PolySymbol.variable(SymbolContext(1, 1), "x'0"), GRID, H)


def test_compose_multiplies_operators() -> None:
    first = weyl_kernel(GridSymbol.from_function(lambda k, x: x + 0 * k, GRID, H), H)
    second = weyl_kernel(GridSymbol.from_function(lambda k, x: np.cos(x) + 0 * k, GRID, H), H)
    product = compose(first, second)
    np.testing.assert_allclose(product.operator, first.operator @ second.operator, atol=1e-12)
    with pytest.raises(BasisMismatchError):
        compose(first, OperatorMatrix(np.eye(GRID.n_points), Basis.HO_EIGENBASIS, H))


def test_projection_onto_eigenbasis() -> None:
    h = 2 * math.pi
    grid = Grid1D(64, 20.0)
    kernel = weyl_kernel(GridSymbol.from_function(lambda k, x: (k**2 + x**2) / 2, grid, h), h)
    values, vectors = eigenbasis(kernel, 3)
    projected = kernel.in_basis(vectors)
    assert projected.basis == Basis.HO_EIGENBASIS
    np.testing.assert_allclose(projected.entries, np.diag(values), atol=1e-8)
    with pytest.raises(ShapeMismatchError):
        kernel.in_basis(np.eye(4))
    with pytest.raises(BasisMismatchError):
        projected.in_basis(vectors)


def test_operator_exports() -> None:
    kernel = weyl_kernel(GridSymbol.from_function(band_limited(GRID, H), GRID, H), H)
    again = OperatorMatrix.from_json_dict(json.loads(kernel.dumps()))
    np.testing.assert_array_equal(again.entries, kernel.entries)
    assert again.grid == GRID
    payload = kernel.to_bytes()
    assert len(payload) == 8 + 16 * GRID.n_points**2
    decoded = OperatorMatrix.from_bytes(payload, Basis.POSITION_GRID, H, GRID)
    np.testing.assert_array_equal(decoded.entries, kernel.entries)


def test_symbol_exports() -> None:
    sigma = GridSymbol.from_function(band_limited(GRID, H), GRID, H)
    data = sigma.to_json_dict()
    assert data["shape"] == [GRID.n_points, 2 * GRID.n_points]
    assert data["x_grid"]["n_points"] == 2 * GRID.n_points
    payload = sigma.to_bytes()
    np.testing.assert_array_equal(np.frombuffer(payload[:16], "<i8"), data["shape"])
    assert len(payload) == 16 + 16 * sigma.values.size
