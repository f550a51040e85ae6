# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Algebraic identity checks over seeded random symbols.

Each check returns an `IdentityResult` holding the largest residual seen and
the tolerance it was held to. Nothing here raises on failure; the caller
decides what a failing identity means.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from ._common import IDENTITY_TOLERANCE, SLOPE_TOLERANCE, TWO_PI
from .spectral import Grid1D
from .symbols import (
    PolySymbol,
    SymbolContext,
    classical_weight,
    is_classically_bilinear,
    jacobi_anomaly,
    jacobiator,
    moyal_commutator,
    moyal_star,
    moyal_star_series,
    poisson_bracket,
    qc_bracket,
    qc_bracket_kn,
    random_symbol,
)
from .weyl import GridSymbol, compose, grid_star, harmonic_heat_symbol, weyl_kernel

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

logger = logging.getLogger(__name__)

DEFAULT_H_SWEEP = (1e-1, 1e-2, 1e-3, 1e-4)
"""Planck constants used for the classical-limit fit."""

EXPECTED_SLOPE = 2.0
"""Order in h of the first correction to the classical limit."""

COMPOSITION_TOLERANCE = 1e-6
"""Relative kernel error allowed for grid operator composition."""

COMPOSITION_H = 0.4 * math.pi
"""Planck constant of the composition check, ħ = 0.2."""

COMPOSITION_POINTS = 256
"""Grid size of the composition check."""

COMPOSITION_EXTENT = 16.0
"""Position box of the composition check."""


@dataclass(frozen=True)
class IdentityResult:
    """
    Outcome of one identity check.
    """

    name: str
    """Short identifier, also used as the report row label."""
    residual: float
    """Largest violation seen, or the deviation of the fitted slope."""
    tolerance: float
    """Threshold the residual was held to."""
    trials: int = 0
    """Number of random instances checked."""
    details: dict[str, Any] = field(default_factory=dict)
    """Check-specific extras, such as the fitted slope."""

    @property
    def passed(self) -> bool:
        """True if the residual is within tolerance."""
        return bool(self.residual <= self.tolerance)


def _relative(difference: PolySymbol, *references: PolySymbol) -> float:
    scale = max([1.0, *(ref.max_abs() for ref in references)])
    return difference.max_abs() / scale


def check_antisymmetry(
    rng: np.random.Generator,
    trials: int,
    *,
    max_degree: int = 4,
    h: float = 1.0,
    context: SymbolContext | None = None,
) -> IdentityResult:
    """
    qc(σ, τ) + qc(τ, σ) must vanish coefficient by coefficient.

    Both the Moyal and the Kohn-Nirenberg brackets are checked, with zero
    tolerance.
    """
    context = context or SymbolContext(1, 1)
    worst = 0.0
    for _ in range(trials):
        sigma = random_symbol(rng, context, max_degree, 6)
        tau = random_symbol(rng, context, max_degree, 6)
        for bracket in (qc_bracket, qc_bracket_kn):
            total = bracket(sigma, tau, h) + bracket(tau, sigma, h)
            worst = max(worst, total.max_abs())
    return IdentityResult("antisymmetry", worst, 0.0, trials)


def check_jacobi(
    rng: np.random.Generator,
    trials: int,
    *,
    max_degree: int = 3,
    h: float = 1.0,
    context: SymbolContext | None = None,
) -> IdentityResult:
    """
    The Jacobi identity on classically bilinear triples.

    The residual is the largest relative Jacobiator over `trials` triples
    whose classical parts are at most bilinear. As a second figure, unrestricted
    triples are compared against :func:`jacobi_anomaly`; their largest
    relative mismatch is reported in the details and also bounded by the
    tolerance.
    """
    context = context or SymbolContext(1, 1)
    worst = 0.0
    anomaly_worst = 0.0
    largest_anomaly = 0.0
    for _ in range(trials):
        triple = [
            random_symbol(rng, context, max_degree, 4, classical_bilinear=True) for _ in range(3)
        ]
        if not all(is_classically_bilinear(s) for s in triple):
            msg = "random bilinear symbol left the bilinear class"
            raise AssertionError(msg)
        worst = max(worst, _relative(jacobiator(*triple, h), *triple))
        general = [random_symbol(rng, context, max_degree, 4) for _ in range(3)]
        anomaly = jacobi_anomaly(*general, h)
        mismatch = jacobiator(*general, h) - anomaly
        anomaly_worst = max(anomaly_worst, _relative(mismatch, *general))
        largest_anomaly = max(largest_anomaly, anomaly.max_abs())
    residual = max(worst, anomaly_worst)
    logger.debug("largest Jacobi anomaly among unrestricted triples: %.3g", largest_anomaly)
    return IdentityResult(
        "jacobi",
        residual,
        IDENTITY_TOLERANCE,
        trials,
        {
            "bilinear_residual": worst,
            "anomaly_residual": anomaly_worst,
            "largest_anomaly": largest_anomaly,
        },
    )


def classical_limit_errors(
    sigma: PolySymbol, tau: PolySymbol, h_values: Sequence[float]
) -> list[float]:
    """
    max |(2πi/h)·[σ, τ]⋆ − {σ, τ}| for each h.
    """
    exact = poisson_bracket(sigma, tau)
    return [
        (moyal_commutator(sigma, tau, h) * (1j * TWO_PI / h) - exact).max_abs() for h in h_values
    ]


def check_classical_limit(h_values: Sequence[float] = DEFAULT_H_SWEEP) -> IdentityResult:
    """
    The scaled commutator approaches the Poisson bracket as h².

    Fixed quartic symbols are used so the h² term cannot vanish by accident;
    their only third-order contribution comes from the x⁴ and k⁴ terms.
    The residual is |slope − 2| of a least-squares fit of log error against
    log h.
    """
    context = SymbolContext(1, 0)
    x, k = PolySymbol.variable(context, "x0"), PolySymbol.variable(context, "k0")
    sigma = x**4 + 0.5 * x**2 * k - 0.3 * k**2
    tau = k**4 - 0.7 * x * k**2 + 0.2 * x**2
    errors = classical_limit_errors(sigma, tau, h_values)
    slope = float(np.polyfit(np.log10(h_values), np.log10(errors), 1)[0])
    return IdentityResult(
        "classical_limit",
        abs(slope - EXPECTED_SLOPE),
        SLOPE_TOLERANCE,
        len(h_values),
        {"slope": slope, "h": list(h_values), "errors": errors},
    )


def check_reduction(
    rng: np.random.Generator, trials: int, *, max_degree: int = 4, h: float = 1.0
) -> IdentityResult:
    """
    The bracket reduces exactly to its pure limits.

    Symbols without classical variables must give the Moyal commutator, and
    symbols without quantum variables must give (h/2πi) times the Poisson
    bracket, both with exact coefficient equality. The residual counts the
    failed comparisons.
    """
    quantum_only = SymbolContext(1, 0)
    classical_only = SymbolContext(0, 2)
    failures = 0
    for _ in range(trials):
        sigma = random_symbol(rng, quantum_only, max_degree, 6)
        tau = random_symbol(rng, quantum_only, max_degree, 6)
        if qc_bracket(sigma, tau, h) != moyal_commutator(sigma, tau, h):
            failures += 1
        sigma = random_symbol(rng, classical_only, max_degree, 6)
        tau = random_symbol(rng, classical_only, max_degree, 6)
        if qc_bracket(sigma, tau, h) != poisson_bracket(sigma, tau) * classical_weight(h):
            failures += 1
    return IdentityResult("reduction", float(failures), 0.0, trials)


def check_associativity(
    rng: np.random.Generator, trials: int, *, max_degree: int = 3, h: float = 1.0
) -> IdentityResult:
    """(σ⋆τ)⋆φ = σ⋆(τ⋆φ) for the pure Moyal product."""
    context = SymbolContext(2, 0)
    worst = 0.0
    for _ in range(trials):
        sigma, tau, phi = (random_symbol(rng, context, max_degree, 5) for _ in range(3))
        left = moyal_star(moyal_star(sigma, tau, h), phi, h)
        right = moyal_star(sigma, moyal_star(tau, phi, h), h)
        worst = max(worst, _relative(left - right, left, right))
    return IdentityResult("associativity", worst, IDENTITY_TOLERANCE, trials)


def check_odd_powers(
    rng: np.random.Generator, trials: int, *, max_degree: int = 5
) -> IdentityResult:
    """The Moyal commutator has no even powers of h."""
    context = SymbolContext(1, 0)
    worst = 0.0
    for _ in range(trials):
        sigma = random_symbol(rng, context, max_degree, 6)
        tau = random_symbol(rng, context, max_degree, 6)
        forward = moyal_star_series(sigma, tau)
        backward = moyal_star_series(tau, sigma)
        zero = PolySymbol.zero(context)
        for order in set(forward) | set(backward):
            if order % 2:
                continue
            first = forward.get(order, zero)
            second = backward.get(order, zero)
            worst = max(worst, _relative(first - second, first, second))
    return IdentityResult("odd_powers", worst, IDENTITY_TOLERANCE, trials)


def _shifted_gaussian(rng: np.random.Generator) -> Callable[[Any, Any], Any]:
    k0, x0 = rng.uniform(-0.5, 0.5, size=2)
    wk, wx = rng.uniform(0.6, 0.9, size=2)
    phase = rng.uniform(-0.5, 0.5)

    def symbol(k: Any, x: Any) -> Any:
        envelope = -((k - k0) ** 2) / (2 * wk**2) - (x - x0) ** 2 / (2 * wx**2)
        return np.exp(envelope + 1j * phase * k)

    return symbol


def composition_error(
    sigma: GridSymbol, tau: GridSymbol, product: GridSymbol, h: float
) -> float:
    """Relative max-norm distance between Op(σ)Op(τ) and Op(product)."""
    composed = compose(weyl_kernel(sigma, h), weyl_kernel(tau, h)).operator
    expected = weyl_kernel(product, h).operator
    return float(np.max(np.abs(composed - expected)) / max(np.max(np.abs(expected)), 1e-300))


def check_composition(
    rng: np.random.Generator,
    trials: int,
    *,
    n_points: int = COMPOSITION_POINTS,
    extent: float = COMPOSITION_EXTENT,
    h: float = COMPOSITION_H,
) -> IdentityResult:
    """
    Op(σ)Op(τ) = Op(σ⋆τ) on a position grid.

    Two families are checked: heat kernels of the oscillator, whose product
    is known in closed form, and random shifted Gaussians against the
    spectral star product :func:`grid_star`.
    """
    grid = Grid1D(n_points, extent)
    worst_heat = 0.0
    worst_random = 0.0
    for _ in range(trials):
        beta, gamma = rng.uniform(1.0, 2.0, size=2)
        first = GridSymbol.from_function(harmonic_heat_symbol(beta, h), grid, h)
        second = GridSymbol.from_function(harmonic_heat_symbol(gamma, h), grid, h)
        product = GridSymbol.from_function(harmonic_heat_symbol(beta + gamma, h), grid, h)
        worst_heat = max(worst_heat, composition_error(first, second, product, h))
        sigma = GridSymbol.from_function(_shifted_gaussian(rng), grid, h)
        tau = GridSymbol.from_function(_shifted_gaussian(rng), grid, h)
        product = grid_star(sigma, tau, h)
        worst_random = max(worst_random, composition_error(sigma, tau, product, h))
    return IdentityResult(
        "composition",
        max(worst_heat, worst_random),
        COMPOSITION_TOLERANCE,
        trials,
        {"heat_kernel": worst_heat, "random_gaussian": worst_random, "n_points": n_points},
    )


IDENTITY_NAMES = (
    "antisymmetry",
    "jacobi",
    "classical_limit",
    "reduction",
    "associativity",
    "odd_powers",
    "composition",
)
"""Checks run by :func:`run_identities`, in report order."""


def run_identities(  # noqa: PLR0913
    seed: int,
    trials: int,
    *,
    names: Sequence[str] = IDENTITY_NAMES,
    h_values: Sequence[float] = DEFAULT_H_SWEEP,
    composition_trials: int | None = None,
    n_points: int = COMPOSITION_POINTS,
    max_degree: int | None = None,
) -> list[IdentityResult]:
    """
    Run the selected identity checks with one seeded generator.

    Parameters
    ----------
    seed : int
        Seed of the numpy generator shared by every check.
    trials : int
        Random instances per symbolic check.
    names : sequence of str, optional
        Subset of :data:`IDENTITY_NAMES` to run.
    h_values : sequence of float, optional
        Planck constants for the classical-limit fit.
    composition_trials : int, optional
        Random pairs for the grid composition check; one per fifty
        `trials`, at least one, by default.
    n_points : int, optional
        Grid size of the composition check.
    max_degree : int, optional
        Degree bound of the random symbols; each check keeps its own default
        when unset.

    Raises
    ------
    ValueError
        If a name is not a known identity.
    """
    unknown = sorted(set(names) - set(IDENTITY_NAMES))
    if unknown:
        msg = f"unknown identities: {', '.join(unknown)}"
        raise ValueError(msg)
    rng = np.random.default_rng(seed)
    grid_trials = composition_trials or max(1, math.ceil(trials / 50))
    degree: dict[str, Any] = {} if max_degree is None else {"max_degree": max_degree}
    runners: dict[str, Callable[[], IdentityResult]] = {
        "antisymmetry": lambda: check_antisymmetry(rng, trials, **degree),
        "jacobi": lambda: check_jacobi(rng, trials, **degree),
        "classical_limit": lambda: check_classical_limit(h_values),
        "reduction": lambda: check_reduction(rng, trials, **degree),
        "associativity": lambda: check_associativity(rng, trials, **degree),
        "odd_powers": lambda: check_odd_powers(rng, trials, **degree),
        "composition": lambda: check_composition(rng, grid_trials, n_points=n_points),
    }
    results = []
    for name in IDENTITY_NAMES:
        if name not in names:
            continue
        result = runners[name]()
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(
            level, "%s: residual %.3g (tolerance %.3g)", name, result.residual, result.tolerance
        )
        results.append(result)
    return results
