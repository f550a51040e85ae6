# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Analytic coupled quantum-classical harmonic oscillator.

The Hamiltonian is ½(k'² + k² + x'² + x² + α(x' − x)²) with one quantum pair
(k, x) and one classical pair (k', x'). Phase points are written z = k + ix.
The normal modes have frequencies ω₁ = 1 and ω₂ = √(1 + 2α), and the mixing
map uses the exponentials e^{2iωt}; one unit of analytic time t equals
TIME_SCALE units of Hamilton time.

Fock states are monomials zⁿ with squared norm n!.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

from ._common import hbar
from .errors import OscillatorError
from .symbols import PolySymbol, SymbolContext

if TYPE_CHECKING:
    from collections.abc import Iterable

    from numpy.typing import NDArray

logger = logging.getLogger(__name__)

TIME_SCALE = 2.0
"""Hamilton time elapsed per unit of analytic time."""

RATIO_TOLERANCE = 1e-12
"""Largest |ω₂/ω₁ − p/q| accepted as a rational frequency ratio."""

MAX_DENOMINATOR = 1000
"""Largest denominator tried when looking for a rational frequency ratio."""


@dataclass(frozen=True)
class OscillatorConfig:
    """
    Parameters of the coupled oscillator and its initial state.
    """

    alpha: float = 0.0
    """Coupling strength; 1 + 2α must be positive."""
    z0_classical: complex = 0j
    """Initial classical phase point k' + ix'."""
    n_quantum: int = 0
    """Fock label n of the initial quantum state zⁿ."""

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha) or 1 + 2 * self.alpha <= 0:
            msg = f"coupling α = {self.alpha} needs 1 + 2α > 0"
            raise OscillatorError(msg)
        if self.n_quantum < 0:
            msg = f"Fock label must be non-negative, got {self.n_quantum}"
            raise OscillatorError(msg)


@dataclass(frozen=True, eq=False)
class MixedOscState:
    """
    Analytic mixed state: a classical point and a quantum polynomial in z.
    """

    t: float
    """Analytic time."""
    z_classical: complex
    """Support of the classical delta function, k' + ix'."""
    quantum_coeffs: NDArray[np.complex128]
    """Coefficients of z⁰ … zⁿ."""


def hamiltonian_symbol(cfg: OscillatorConfig | float) -> PolySymbol:
    """
    The coupled Hamiltonian as a polynomial symbol in one quantum and one classical pair.

    Examples
    --------
    >>> h = hamiltonian_symbol(1.0)
    >>> h.coefficient([1, 0, 1, 0])  # x x' term
    (-1+0j)
    """
    alpha = cfg.alpha if isinstance(cfg, OscillatorConfig) else OscillatorConfig(float(cfg)).alpha
    context = SymbolContext(1, 1)
    x, k, xc, kc = (PolySymbol.variable(context, name) for name in ("x0", "k0", "x'0", "k'0"))
    return (kc**2 + k**2 + xc**2 + x**2 + alpha * (xc - x) ** 2) * 0.5


def normal_modes(alpha: float) -> tuple[float, float]:
    """
    Normal-mode frequencies (1, √(1 + 2α)).

    Raises
    ------
    OscillatorError
        If 1 + 2α is not positive.

    Examples
    --------
    >>> normal_modes(1.5)
    (1.0, 2.0)
    """
    return 1.0, math.sqrt(1 + 2 * OscillatorConfig(alpha).alpha)


def mixing_coefficients(t: float, alpha: float) -> tuple[complex, complex]:
    """
    The mixing map entries a = (e^{2iω₁t} + e^{2iω₂t})/2 and b = (e^{2iω₁t} − e^{2iω₂t})/2.

    Examples
    --------
    >>> a, b = mixing_coefficients(0.0, 0.7)
    >>> a, b
    ((1+0j), 0j)
    """
    omega1, omega2 = normal_modes(alpha)
    first = complex(np.exp(2j * omega1 * t))
    second = complex(np.exp(2j * omega2 * t))
    return (first + second) / 2, (first - second) / 2


def evolve_state(cfg: OscillatorConfig, t: float) -> MixedOscState:
    """
    The analytic mixed state at time `t`.

    The classical support moves to a·z'₀ and the quantum factor becomes
    (b·z'₀ + a·z)ⁿ, expanded into the coefficients C(n, k)·aᵏ·(b·z'₀)ⁿ⁻ᵏ of zᵏ.
    """
    a, b = mixing_coefficients(t, cfg.alpha)
    n = cfg.n_quantum
    shift = b * cfg.z0_classical
    coeffs = np.array(
        [math.comb(n, k) * a**k * shift ** (n - k) for k in range(n + 1)], dtype=np.complex128
    )
    return MixedOscState(t, a * cfg.z0_classical, coeffs)


def transition_probabilities(cfg: OscillatorConfig, t: float) -> NDArray[np.float64]:
    """
    Probabilities P(n → k), k = 0 … n, under the Fock norm ‖zᵏ‖² = k!.

    Raises
    ------
    OscillatorError
        If every amplitude vanishes, so no probability can be assigned.
    """
    coeffs = evolve_state(cfg, t).quantum_coeffs
    weights = np.abs(coeffs) ** 2 * np.array(
        [math.factorial(k) for k in range(coeffs.size)], dtype=float
    )
    total = float(np.sum(weights))
    if total == 0 or not math.isfinite(total):
        msg = f"the quantum state vanishes at t = {t:.6g}; probabilities are undefined"
        raise OscillatorError(msg)
    return weights / total


def initial_energy(cfg: OscillatorConfig, h: float) -> float:
    """
    Energy of Fock state n at the classical point z'₀.

    With ⟨x⟩ = 0 and ⟨x²⟩ = ħ(n + ½) this is
    ½|z'₀|² + ½αx'₀² + ħ(n + ½)(1 + ½α).

    Examples
    --------
    >>> initial_energy(OscillatorConfig(0.0, 1 + 0j, 0), 6.283185307179586)
    1.0
    """
    occupation = hbar(h) * (cfg.n_quantum + 0.5)
    z0 = cfg.z0_classical
    return 0.5 * abs(z0) ** 2 + 0.5 * cfg.alpha * z0.imag**2 + occupation * (1 + 0.5 * cfg.alpha)


def recurrence_time(alpha: float) -> float | None:
    """
    Common period of e^{2iω₁t} and e^{2iω₂t}, or None if the ratio is irrational.

    Examples
    --------
    >>> import math
    >>> recurrence_time(1.5) == math.pi
    True
    >>> recurrence_time(0.5) is None
    True
    """
    omega1, omega2 = normal_modes(alpha)
    ratio = omega2 / omega1
    approx = Fraction(ratio).limit_denominator(MAX_DENOMINATOR)
    if abs(ratio - approx.numerator / approx.denominator) >= RATIO_TOLERANCE:
        logger.debug("frequency ratio %.17g is not rational", ratio)
        return None
    return approx.denominator * math.pi / omega1


def _flow_matrix(alpha: float) -> NDArray[np.float64]:
    """Hamilton's equations for (x, k, x', k') as dy/dτ = M y."""
    stiff = 1 + alpha
    return np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [-stiff, 0.0, alpha, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [alpha, 0.0, -stiff, 0.0],
        ]
    )


def exact_flow(
    alpha: float, t: float, z0: complex, z0_classical: complex
) -> tuple[complex, complex]:
    """
    Hamilton's flow of the coupled Hamiltonian over analytic time `t`.

    Parameters
    ----------
    alpha : float
        Coupling strength.
    t : float
        Analytic time; the flow runs for TIME_SCALE·t units of Hamilton time.
    z0, z0_classical : complex
        Initial quantum centroid and classical point, each k + ix.

    Returns
    -------
    tuple of complex
        The quantum centroid and the classical point at time `t`.
    """
    OscillatorConfig(alpha)
    state = np.array([z0.imag, z0.real, z0_classical.imag, z0_classical.real])
    final = linalg.expm(_flow_matrix(alpha) * TIME_SCALE * t) @ state
    return complex(final[1], final[0]), complex(final[3], final[2])


def euler_spectrum(n_levels: int) -> NDArray[np.float64]:
    """Eigenvalues 0, 1, …, n_levels − 1 of the Euler operator z d/dz."""
    return np.arange(n_levels, dtype=float)


def oscillator_levels(n_levels: int, h: float) -> NDArray[np.float64]:
    """Energies ħ(n + ½) of (k² + x²)/2, the Euler spectrum shifted and scaled."""
    return hbar(h) * (euler_spectrum(n_levels) + 0.5)


def time_series(cfg: OscillatorConfig, times: Iterable[float]) -> list[tuple[float, ...]]:
    """
    Rows (t, Re z', Im z', P(n → 0), …, P(n → n)) at the requested times.
    """
    rows = []
    for t in times:
        state = evolve_state(cfg, t)
        probs = transition_probabilities(cfg, t)
        rows.append((float(t), state.z_classical.real, state.z_classical.imag, *map(float, probs)))
    return rows
