# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Exact polynomial symbol algebra.

Symbols are sparse complex polynomials in the quantum phase variables (x, k)
and the classical phase variables (x', k'). Every product series terminates
for polynomials, so the Moyal product, the Kohn-Nirenberg product and the
quantum-classical bracket below are exact up to floating point rounding.

The momentum operator is (h/2πi)∂ₓ, which gives x⋆k − k⋆x = ih/2π and

    (2πi/h)·qc_bracket(σ, τ) = poisson_bracket(σ, τ) + O(h²).

Classical variables multiply pointwise.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import IntEnum
from types import MappingProxyType
from typing import TYPE_CHECKING, Any, Union

import numpy as np

from ._common import DROP_TOLERANCE, TWO_PI, check_planck
from .errors import ContextMismatchError, VariableError

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Mapping, Sequence

    from numpy.typing import ArrayLike

logger = logging.getLogger(__name__)

Exponent = tuple[int, ...]
"""Exponent vector of a monomial, one entry per context variable."""

Terms = dict[Exponent, complex]

Scalar = Union[int, float, complex]

_Product = Callable[["PolySymbol", "PolySymbol", float], "PolySymbol"]


class Sector(IntEnum):
    """
    The two kinds of phase-space degrees of freedom.
    """

    QUANTUM = 0
    CLASSICAL = 1


class Kind(IntEnum):
    """
    Position or momentum coordinate of a degree of freedom.
    """

    POSITION = 0
    MOMENTUM = 1


@dataclass(frozen=True, order=True)
class PhaseVar:
    """
    A single phase-space variable such as x0, k1, x'0 or k'2.

    Variables order lexicographically by (sector, kind, index), so quantum
    variables come before classical ones and positions before momenta.
    """

    sector: Sector
    """Quantum or classical."""
    kind: Kind
    """Position or momentum."""
    index: int
    """Degree of freedom within the sector."""

    @property
    def name(self) -> str:
        """The printable name, for example ``k'1``."""
        letter = "x" if self.kind == Kind.POSITION else "k"
        prime = "'" if self.sector == Sector.CLASSICAL else ""
        return f"{letter}{prime}{self.index}"

    @classmethod
    def parse(cls, name: str) -> PhaseVar:
        """
        Parse a variable name such as ``x0`` or ``k'3``.

        Raises
        ------
        VariableError
            If the name is not a well formed variable name.
        """
        text = name.strip()
        if len(text) < 2 or text[0] not in "xk":  # noqa: PLR2004
            msg = f"invalid phase variable name {name!r}"
            raise VariableError(msg)
        kind = Kind.POSITION if text[0] == "x" else Kind.MOMENTUM
        rest = text[1:]
        sector = Sector.QUANTUM
        if rest.startswith("'"):
            sector = Sector.CLASSICAL
            rest = rest[1:]
        if not rest.isdigit():
            msg = f"invalid phase variable name {name!r}"
            raise VariableError(msg)
        return cls(sector, kind, int(rest))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SymbolContext:
    """
    The set of phase variables a symbol may depend on.
    """

    n_quantum: int = 1
    """Number of quantum degrees of freedom."""
    n_classical: int = 0
    """Number of classical degrees of freedom."""

    def __post_init__(self) -> None:
        if self.n_quantum < 0 or self.n_classical < 0:
            msg = "degree of freedom counts must be non-negative"
            raise ValueError(msg)

    @property
    def size(self) -> int:
        """Length of an exponent vector."""
        return 2 * (self.n_quantum + self.n_classical)

    @property
    def variables(self) -> tuple[PhaseVar, ...]:
        """All variables, in exponent-vector order."""
        return tuple(
            PhaseVar(sector, kind, index)
            for sector in Sector
            for kind in Kind
            for index in range(self.count(sector))
        )

    def count(self, sector: Sector) -> int:
        """Number of degrees of freedom in a sector."""
        return self.n_quantum if sector == Sector.QUANTUM else self.n_classical

    def slot(self, var: PhaseVar | str) -> int:
        """
        Return the exponent-vector position of a variable.

        Raises
        ------
        VariableError
            If the variable does not belong to this context.
        """
        if isinstance(var, str):
            var = PhaseVar.parse(var)
        n = self.count(var.sector)
        if not 0 <= var.index < n:
            msg = f"variable {var.name} is not part of {self}"
            raise VariableError(msg)
        base = 0 if var.sector == Sector.QUANTUM else 2 * self.n_quantum
        return base + int(var.kind) * n + var.index

    def pairs(self, sector: Sector) -> list[tuple[int, int]]:
        """(position slot, momentum slot) for each degree of freedom of a sector."""
        n = self.count(sector)
        base = 0 if sector == Sector.QUANTUM else 2 * self.n_quantum
        return [(base + index, base + n + index) for index in range(n)]

    def zero_exponent(self) -> Exponent:
        """The exponent vector of the constant monomial."""
        return (0,) * self.size

    def __str__(self) -> str:
        return f"SymbolContext(n_quantum={self.n_quantum}, n_classical={self.n_classical})"


def _canonical(terms: Mapping[Exponent, complex], scale: float = 0.0) -> Terms:
    """
    Drop negligible coefficients and sort the terms by exponent.

    A coefficient is negligible when it is smaller than DROP_TOLERANCE times
    the larger of `scale` and the largest surviving magnitude.
    """
    largest = max((abs(value) for value in terms.values()), default=0.0)
    cutoff = DROP_TOLERANCE * max(scale, largest)
    return {
        exp: complex(value)
        for exp, value in sorted(terms.items())
        if value != 0 and abs(value) >= cutoff
    }


class PolySymbol:
    """
    An immutable sparse polynomial symbol.

    Examples
    --------
    >>> ctx = SymbolContext(1, 1)
    >>> x = PolySymbol.variable(ctx, "x0")
    >>> k = PolySymbol.variable(ctx, "k0")
    >>> (x * k + 2).degree
    2
    """

    __slots__ = ("_context", "_terms")

    def __init__(
        self,
        terms: Mapping[Sequence[int], Scalar] | None = None,
        context: SymbolContext | None = None,
    ) -> None:
        self._context = context if context is not None else SymbolContext()
        size = self._context.size
        collected: Terms = {}
        for raw_exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in raw_exp)
            if len(exp) != size or any(e < 0 for e in exp):
                msg = f"exponent {raw_exp!r} does not fit {self._context}"
                raise VariableError(msg)
            collected[exp] = collected.get(exp, 0) + complex(coeff)
        self._terms = _canonical(collected)

    @classmethod
    def _wrap(cls, terms: Terms, context: SymbolContext) -> PolySymbol:
        """Build a symbol from already canonical terms."""
        obj = cls.__new__(cls)
        obj._context = context
        obj._terms = terms
        return obj

    @classmethod
    def constant(cls, context: SymbolContext, value: Scalar) -> PolySymbol:
        """The constant symbol `value`."""
        return cls({context.zero_exponent(): value}, context)

    @classmethod
    def zero(cls, context: SymbolContext) -> PolySymbol:
        """The zero symbol."""
        return cls._wrap({}, context)

    @classmethod
    def variable(cls, context: SymbolContext, var: PhaseVar | str) -> PolySymbol:
        """The symbol consisting of a single variable."""
        exp = [0] * context.size
        exp[context.slot(var)] = 1
        return cls({tuple(exp): 1.0}, context)

    @property
    def context(self) -> SymbolContext:
        """The variable context."""
        return self._context

    @property
    def terms(self) -> Mapping[Exponent, complex]:
        """Read-only view of the exponent to coefficient mapping."""
        return MappingProxyType(self._terms)

    @property
    def is_zero(self) -> bool:
        """True when no coefficient survives."""
        return not self._terms

    @property
    def degree(self) -> int:
        """Largest total degree of any monomial, or -1 for the zero symbol."""
        return max((sum(exp) for exp in self._terms), default=-1)

    def sector_degree(self, sector: Sector) -> int:
        """Largest degree in the variables of one sector."""
        slots = [slot for pair in self._context.pairs(sector) for slot in pair]
        return max((sum(exp[s] for s in slots) for exp in self._terms), default=-1)

    def depends_on(self, sector: Sector) -> bool:
        """True if any monomial contains a variable of `sector`."""
        return self.sector_degree(sector) > 0

    def restrict(self, sector: Sector) -> PolySymbol:
        """
        Keep only the monomials that use no variable outside `sector`.

        Constant terms are kept.

        Examples
        --------
        >>> ctx = SymbolContext(1, 1)
        >>> x, xc = PolySymbol.variable(ctx, "x0"), PolySymbol.variable(ctx, "x'0")
        >>> (x + x * xc + 3).restrict(Sector.QUANTUM) == x + 3
        True
        """
        other = Sector.CLASSICAL if sector == Sector.QUANTUM else Sector.QUANTUM
        slots = [slot for pair in self._context.pairs(other) for slot in pair]
        return PolySymbol._wrap(
            {exp: c for exp, c in self._terms.items() if not any(exp[s] for s in slots)},
            self._context,
        )

    def coefficient(self, exp: Sequence[int]) -> complex:
        """The coefficient of one monomial (zero if absent)."""
        return self._terms.get(tuple(exp), 0j)

    def max_abs(self) -> float:
        """Largest coefficient magnitude."""
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def conj(self) -> PolySymbol:
        """Complex conjugate (the symbol of the adjoint operator)."""
        return PolySymbol._wrap(
            {exp: c.conjugate() for exp, c in self._terms.items()}, self._context
        )

    def derivative(self, var: PhaseVar | str, order: int = 1) -> PolySymbol:
        """Partial derivative with respect to one variable."""
        return _derivative(self, self._context.slot(var), order)

    def evaluate(self, point: Mapping[PhaseVar | str, ArrayLike] | Sequence[ArrayLike]) -> Any:
        """
        Evaluate the symbol at a point or on arrays of points.

        Parameters
        ----------
        point : mapping or sequence
            Either a mapping from variables (or their names) to values, or a
            sequence of values in the context's variable order. Values may be
            numpy arrays, which broadcast against each other.

        Returns
        -------
        complex or numpy.ndarray
            The value of the symbol.

        Raises
        ------
        VariableError
            If a variable the symbol needs has no value.
        """
        values: list[Any] = [None] * self._context.size
        if hasattr(point, "items"):
            for key, value in point.items():  # type: ignore[union-attr]
                values[self._context.slot(key)] = np.asarray(value)
        else:
            seq = list(point)  # type: ignore[arg-type]
            if len(seq) != self._context.size:
                msg = f"expected {self._context.size} values, got {len(seq)}"
                raise VariableError(msg)
            values = [np.asarray(v) for v in seq]
        result: Any = 0j
        for exp, coeff in self._terms.items():
            term: Any = coeff
            for slot, power in enumerate(exp):
                if power == 0:
                    continue
                if values[slot] is None:
                    name = self._context.variables[slot].name
                    msg = f"no value given for variable {name}"
                    raise VariableError(msg)
                term = term * values[slot] ** power
            result = result + term
        return result

    def allclose(
        self, other: PolySymbol | Scalar, rtol: float = 1e-12, atol: float = 1e-14
    ) -> bool:
        """
        Coefficient-wise approximate equality.
        """
        other = _coerce(other, self._context)
        _check_context(self, other)
        for exp in set(self._terms) | set(other._terms):
            a = self._terms.get(exp, 0j)
            b = other._terms.get(exp, 0j)
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    def to_json_dict(self) -> dict[str, Any]:
        """
        Serialize to the canonical JSON layout.

        The layout is ``{"vars": [...], "terms": [{"exp", "re", "im"}, ...]}``
        with terms sorted by exponent vector.
        """
        return {
            "vars": [var.name for var in self._context.variables],
            "terms": [
                {"exp": list(exp), "re": c.real, "im": c.imag}
                for exp, c in self._terms.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> PolySymbol:
        """
        Parse the layout written by :meth:`to_json_dict`.

        Raises
        ------
        VariableError
            If the variable list is not in canonical order.
        """
        names = [str(name) for name in data.get("vars", [])]
        parsed = [PhaseVar.parse(name) for name in names]
        n_quantum = sum(1 for v in parsed if v.sector == Sector.QUANTUM) // 2
        n_classical = sum(1 for v in parsed if v.sector == Sector.CLASSICAL) // 2
        context = SymbolContext(n_quantum, n_classical)
        if [v.name for v in context.variables] != names:
            msg = f"variable list {names} is not in canonical order"
            raise VariableError(msg)
        terms: dict[Exponent, complex] = {}
        for term in data.get("terms", []):
            exp = tuple(int(e) for e in term["exp"])
            terms[exp] = terms.get(exp, 0) + complex(float(term["re"]), float(term.get("im", 0.0)))
        return cls(terms, context)

    def dumps(self) -> str:
        """Serialize to a JSON string."""
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str) -> PolySymbol:
        """Parse a JSON string written by :meth:`dumps`."""
        return cls.from_json_dict(json.loads(text))

    def __add__(self, other: PolySymbol | Scalar) -> PolySymbol:
        return _add(self, _coerce(other, self._context))

    __radd__ = __add__

    def __sub__(self, other: PolySymbol | Scalar) -> PolySymbol:
        return _subtract(self, _coerce(other, self._context))

    def __rsub__(self, other: Scalar) -> PolySymbol:
        return _subtract(_coerce(other, self._context), self)

    def __neg__(self) -> PolySymbol:
        return PolySymbol._wrap({exp: -c for exp, c in self._terms.items()}, self._context)

    def __mul__(self, other: PolySymbol | Scalar) -> PolySymbol:
        if isinstance(other, PolySymbol):
            return _pointwise(self, other)
        return _scale(self, complex(other))

    def __rmul__(self, other: Scalar) -> PolySymbol:
        return _scale(self, complex(other))

    def __truediv__(self, other: Scalar) -> PolySymbol:
        return _scale(self, 1 / complex(other))

    def __pow__(self, power: int) -> PolySymbol:
        if power < 0:
            msg = "symbols only support non-negative integer powers"
            raise ValueError(msg)
        result = PolySymbol.constant(self._context, 1.0)
        for _ in range(power):
            result = _pointwise(result, self)
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolySymbol):
            return NotImplemented
        return self._context == other._context and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._context, tuple(self._terms.items())))

    def __iter__(self) -> Iterator[tuple[Exponent, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        return f"PolySymbol({self._terms!r}, {self._context!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = [var.name for var in self._context.variables]
        parts = []
        for exp, coeff in self._terms.items():
            factors = [
                name if power == 1 else f"{name}^{power}"
                for name, power in zip(names, exp)
                if power
            ]
            value = coeff.real if coeff.imag == 0 else coeff
            parts.append(" ".join([f"({value:g})", *factors]))
        return " + ".join(parts)


def _coerce(value: PolySymbol | Scalar, context: SymbolContext) -> PolySymbol:
    if isinstance(value, PolySymbol):
        return value
    return PolySymbol.constant(context, value)


def _check_context(*symbols: PolySymbol) -> SymbolContext:
    context = symbols[0].context
    for symbol in symbols[1:]:
        if symbol.context != context:
            msg = f"cannot combine symbols from {context} and {symbol.context}"
            raise ContextMismatchError(msg)
    return context


def _add(a: PolySymbol, b: PolySymbol) -> PolySymbol:
    context = _check_context(a, b)
    result: Terms = dict(a.terms)
    for exp, c in b.terms.items():
        result[exp] = result.get(exp, 0) + c
    scale = max(a.max_abs(), b.max_abs())
    return PolySymbol._wrap(_canonical(result, scale), context)  # noqa: SLF001


def _subtract(a: PolySymbol, b: PolySymbol) -> PolySymbol:
    context = _check_context(a, b)
    result: Terms = dict(a.terms)
    for exp, c in b.terms.items():
        result[exp] = result.get(exp, 0) - c
    scale = max(a.max_abs(), b.max_abs())
    return PolySymbol._wrap(_canonical(result, scale), context)  # noqa: SLF001


def _scale(a: PolySymbol, factor: complex) -> PolySymbol:
    return PolySymbol._wrap(  # noqa: SLF001
        _canonical({exp: factor * c for exp, c in a.terms.items()}), a.context
    )


def _pointwise(a: PolySymbol, b: PolySymbol) -> PolySymbol:
    context = _check_context(a, b)
    result: Terms = {}
    scale = 0.0
    for (ea, ca), (eb, cb) in itertools.product(a.terms.items(), b.terms.items()):
        exp = tuple(i + j for i, j in zip(ea, eb))
        value = ca * cb
        scale = max(scale, abs(value))
        result[exp] = result.get(exp, 0) + value
    return PolySymbol._wrap(_canonical(result, scale), context)  # noqa: SLF001


def _falling(n: int, k: int) -> int:
    """n·(n−1)···(n−k+1)."""
    return math.perm(n, k) if k <= n else 0


def _derivative(a: PolySymbol, slot: int, order: int) -> PolySymbol:
    result: Terms = {}
    for exp, c in a.terms.items():
        if exp[slot] < order:
            continue
        new = list(exp)
        new[slot] -= order
        result[tuple(new)] = c * _falling(exp[slot], order)
    return PolySymbol._wrap(_canonical(result), a.context)  # noqa: SLF001


def derivative(sigma: PolySymbol, var: PhaseVar | str, order: int = 1) -> PolySymbol:
    """
    Partial derivative of a symbol.

    Examples
    --------
    >>> ctx = SymbolContext(1, 0)
    >>> x = PolySymbol.variable(ctx, "x0")
    >>> str(derivative(x ** 3, "x0", 2))
    '(6) x0'
    """
    return sigma.derivative(var, order)


# Each choice is (h order, weight, exponent loss on the left factor, on the right factor),
# with exponent losses given as {slot: count}.
_Choice = tuple[int, float, dict[int, int], dict[int, int]]


def _moyal_choices(ea: Exponent, eb: Exponent, pair: tuple[int, int]) -> list[_Choice]:
    """
    Bidifferential terms of the Moyal product for one quantum pair.

    α derivatives hit x on the left and k on the right, β derivatives hit k on
    the left and x on the right, weighted by (−1)^β/(α!β!).
    """
    xs, ks = pair
    choices = []
    for alpha in range(min(ea[xs], eb[ks]) + 1):
        for beta in range(min(ea[ks], eb[xs]) + 1):
            weight = (
                (-1) ** beta
                * _falling(ea[xs], alpha)
                * _falling(eb[ks], alpha)
                * _falling(ea[ks], beta)
                * _falling(eb[xs], beta)
                / (math.factorial(alpha) * math.factorial(beta))
            )
            choices.append((alpha + beta, weight, {xs: alpha, ks: beta}, {ks: alpha, xs: beta}))
    return choices


def _kn_choices(ea: Exponent, eb: Exponent, pair: tuple[int, int]) -> list[_Choice]:
    """Kohn-Nirenberg terms: k derivatives on the left, x derivatives on the right."""
    xs, ks = pair
    return [
        (
            alpha,
            _falling(ea[ks], alpha) * _falling(eb[xs], alpha) / math.factorial(alpha),
            {ks: alpha},
            {xs: alpha},
        )
        for alpha in range(min(ea[ks], eb[xs]) + 1)
    ]


def _product_series(a: PolySymbol, b: PolySymbol, *, kohn_nirenberg: bool) -> dict[int, Terms]:
    """
    Raw coefficients of a star product, grouped by h order.

    The order-j entry still has to be multiplied by (prefactor·h)^j.
    """
    context = _check_context(a, b)
    pairs = context.pairs(Sector.QUANTUM)
    make = _kn_choices if kohn_nirenberg else _moyal_choices
    series: dict[int, Terms] = {}
    for (ea, ca), (eb, cb) in itertools.product(a.terms.items(), b.terms.items()):
        per_pair = [make(ea, eb, pair) for pair in pairs]
        for combo in itertools.product(*per_pair):
            order = 0
            weight = 1.0
            exp = [i + j for i, j in zip(ea, eb)]
            for pair_order, pair_weight, left, right in combo:
                order += pair_order
                weight *= pair_weight
                for slot, count in itertools.chain(left.items(), right.items()):
                    exp[slot] -= count
            if weight == 0:
                continue
            bucket = series.setdefault(order, {})
            key = tuple(exp)
            bucket[key] = bucket.get(key, 0) + weight * ca * cb
    return series


_MOYAL_PREFACTOR = 1j / (2 * TWO_PI)
_KN_PREFACTOR = 1 / (1j * TWO_PI)


def classical_weight(h: float) -> complex:
    """The factor h/2πi multiplying the classical coupling."""
    return h / (1j * TWO_PI)


def _collapse(series: dict[int, Terms], factor: complex, context: SymbolContext) -> PolySymbol:
    result: Terms = {}
    scale = 0.0
    for order in sorted(series):
        weight = factor**order
        for exp, c in series[order].items():
            value = weight * c
            scale = max(scale, abs(value))
            result[exp] = result.get(exp, 0) + value
    return PolySymbol._wrap(_canonical(result, scale), context)  # noqa: SLF001


def _series_symbols(
    series: dict[int, Terms], prefactor: complex, context: SymbolContext
) -> dict[int, PolySymbol]:
    out = {}
    for order in sorted(series):
        weight = prefactor**order
        terms = _canonical({exp: weight * c for exp, c in series[order].items()})
        if terms:
            out[order] = PolySymbol._wrap(terms, context)  # noqa: SLF001
    return out


def moyal_star(sigma: PolySymbol, tau: PolySymbol, h: float) -> PolySymbol:
    """
    The Moyal (Weyl) star product σ⋆τ.

    Parameters
    ----------
    sigma, tau : PolySymbol
        Symbols in the same context.
    h : float
        Planck's constant, positive.

    Returns
    -------
    PolySymbol
        The exact product. Classical variables multiply pointwise.

    Raises
    ------
    ContextMismatchError
        If the contexts differ.
    ValueError
        If `h` is not positive.

    Examples
    --------
    >>> import math
    >>> ctx = SymbolContext(1, 0)
    >>> x, k = PolySymbol.variable(ctx, "x0"), PolySymbol.variable(ctx, "k0")
    >>> c = moyal_star(x, k, 2 * math.pi) - moyal_star(k, x, 2 * math.pi)
    >>> c.allclose(1j)
    True
    """
    h = check_planck(h)
    series = _product_series(sigma, tau, kohn_nirenberg=False)
    return _collapse(series, _MOYAL_PREFACTOR * h, sigma.context)


def moyal_star_series(sigma: PolySymbol, tau: PolySymbol) -> dict[int, PolySymbol]:
    """
    The coefficients of h^j in σ⋆τ, keyed by j.

    Orders with a vanishing coefficient are omitted.
    """
    series = _product_series(sigma, tau, kohn_nirenberg=False)
    return _series_symbols(series, _MOYAL_PREFACTOR, sigma.context)


def kn_star(sigma: PolySymbol, tau: PolySymbol, h: float) -> PolySymbol:
    """
    The Kohn-Nirenberg product, for the ordering with x to the left of k.

    The result is the symbol of Op(σ)Op(τ) under standard (x-left) ordering.
    """
    h = check_planck(h)
    series = _product_series(sigma, tau, kohn_nirenberg=True)
    return _collapse(series, _KN_PREFACTOR * h, sigma.context)


def moyal_commutator(sigma: PolySymbol, tau: PolySymbol, h: float) -> PolySymbol:
    """
    σ⋆τ − τ⋆σ.
    """
    return moyal_star(sigma, tau, h) - moyal_star(tau, sigma, h)


def poisson_bracket(
    sigma: PolySymbol, tau: PolySymbol, sector: Sector | None = None
) -> PolySymbol:
    """
    Canonical Poisson bracket Σ(∂ₖσ ∂ₓτ − ∂ₓσ ∂ₖτ).

    Parameters
    ----------
    sigma, tau : PolySymbol
        Symbols in the same context.
    sector : Sector, optional
        Restrict the sum to the pairs of one sector. Both sectors by default.

    Examples
    --------
    >>> ctx = SymbolContext(1, 0)
    >>> x, k = PolySymbol.variable(ctx, "x0"), PolySymbol.variable(ctx, "k0")
    >>> poisson_bracket(k, x).allclose(1)
    True
    """
    context = _check_context(sigma, tau)
    sectors = list(Sector) if sector is None else [sector]
    result = PolySymbol.zero(context)
    for current in sectors:
        for xs, ks in context.pairs(current):
            forward = _derivative(sigma, ks, 1) * _derivative(tau, xs, 1)
            backward = _derivative(tau, ks, 1) * _derivative(sigma, xs, 1)
            result = result + (forward - backward)
    return result


def kn_commutator(sigma: PolySymbol, tau: PolySymbol, h: float) -> PolySymbol:
    """
    Commutator under the Kohn-Nirenberg product.
    """
    return kn_star(sigma, tau, h) - kn_star(tau, sigma, h)


def _coupling(sigma: PolySymbol, tau: PolySymbol, h: float, product: _Product) -> PolySymbol:
    """Σₐ (∂k'ₐσ ⋆ ∂x'ₐτ − ∂k'ₐτ ⋆ ∂x'ₐσ) for the quantum product ⋆."""
    context = sigma.context
    result = PolySymbol.zero(context)
    for xs, ks in context.pairs(Sector.CLASSICAL):
        forward = product(_derivative(sigma, ks, 1), _derivative(tau, xs, 1), h)
        backward = product(_derivative(tau, ks, 1), _derivative(sigma, xs, 1), h)
        result = result + (forward - backward)
    return result


def qc_bracket(sigma: PolySymbol, tau: PolySymbol, h: float) -> PolySymbol:
    """
    The quantum-classical bracket.

    It combines the Moyal commutator in the quantum variables with the
    symmetrized classical coupling, weighted by h/2πi, in the classical ones.
    The result is exactly antisymmetric: ``qc_bracket(τ, σ)`` is the negation
    of ``qc_bracket(σ, τ)`` coefficient by coefficient.

    Examples
    --------
    >>> import math
    >>> ctx = SymbolContext(0, 1)
    >>> kc, xc = PolySymbol.variable(ctx, "k'0"), PolySymbol.variable(ctx, "x'0")
    >>> h = 2 * math.pi
    >>> (qc_bracket(kc, xc, h) * (1j * 2 * math.pi / h)).allclose(1)
    True
    """
    _check_context(sigma, tau)
    h = check_planck(h)
    commutator = moyal_commutator(sigma, tau, h)
    coupling = _coupling(sigma, tau, h, moyal_star) * classical_weight(h)
    return commutator + coupling


def qc_bracket_kn(sigma: PolySymbol, tau: PolySymbol, h: float) -> PolySymbol:
    """
    The quantum-classical bracket with the Kohn-Nirenberg quantum product.

    Same structure as :func:`qc_bracket`; the two agree at leading order in h
    and coincide on symbols of degree one in the quantum variables.
    """
    _check_context(sigma, tau)
    h = check_planck(h)
    commutator = kn_commutator(sigma, tau, h)
    coupling = _coupling(sigma, tau, h, kn_star) * classical_weight(h)
    return commutator + coupling


def qc_bracket_series(sigma: PolySymbol, tau: PolySymbol) -> dict[int, PolySymbol]:
    """
    The coefficients of h^j in qc_bracket(σ, τ), keyed by j.

    The order-1 coefficient times 2πi equals the full Poisson bracket.
    """
    context = _check_context(sigma, tau)
    collected: dict[int, PolySymbol] = {}

    def accumulate(series: dict[int, PolySymbol], shift: int, factor: complex) -> None:
        for order, term in series.items():
            key = order + shift
            collected[key] = collected.get(key, PolySymbol.zero(context)) + term * factor

    accumulate(moyal_star_series(sigma, tau), 0, 1)
    accumulate(moyal_star_series(tau, sigma), 0, -1)
    for xs, ks in context.pairs(Sector.CLASSICAL):
        accumulate(
            moyal_star_series(_derivative(sigma, ks, 1), _derivative(tau, xs, 1)),
            1,
            1 / (1j * TWO_PI),
        )
        accumulate(
            moyal_star_series(_derivative(tau, ks, 1), _derivative(sigma, xs, 1)),
            1,
            -1 / (1j * TWO_PI),
        )
    return {order: term for order, term in sorted(collected.items()) if not term.is_zero}


def jacobiator(sigma: PolySymbol, tau: PolySymbol, phi: PolySymbol, h: float) -> PolySymbol:
    """
    Cyclic sum of nested brackets, qc(qc(σ,τ),φ) + qc(qc(τ,φ),σ) + qc(qc(φ,σ),τ).
    """
    _check_context(sigma, tau, phi)
    return (
        qc_bracket(qc_bracket(sigma, tau, h), phi, h)
        + qc_bracket(qc_bracket(tau, phi, h), sigma, h)
        + qc_bracket(qc_bracket(phi, sigma, h), tau, h)
    )


def _associator(u: PolySymbol, v: PolySymbol, w: PolySymbol, h: float) -> PolySymbol:
    context = u.context
    result = PolySymbol.zero(context)
    pairs = context.pairs(Sector.CLASSICAL)
    for (xa, ka), (xb, kb) in itertools.product(pairs, pairs):
        first = moyal_star(
            moyal_star(_derivative(_derivative(u, ka, 1), kb, 1), _derivative(v, xa, 1), h),
            _derivative(w, xb, 1),
            h,
        )
        second = moyal_star(
            moyal_star(_derivative(u, ka, 1), _derivative(v, kb, 1), h),
            _derivative(_derivative(w, xa, 1), xb, 1),
            h,
        )
        result = result + (first - second)
    return result * classical_weight(h) ** 2


def jacobi_anomaly(sigma: PolySymbol, tau: PolySymbol, phi: PolySymbol, h: float) -> PolySymbol:
    """
    Closed-form value of the Jacobiator.

    The classical coupling makes the underlying product non-associative. The
    Jacobiator equals the signed sum of its associators over the six
    orderings of (σ, τ, φ), which this function evaluates directly. It
    vanishes whenever each monomial's classical part is 1, k'ₐ, x'ᵦ or
    k'ₐx'ᵦ.
    """
    _check_context(sigma, tau, phi)
    h = check_planck(h)
    even = [(sigma, tau, phi), (tau, phi, sigma), (phi, sigma, tau)]
    odd = [(tau, sigma, phi), (sigma, phi, tau), (phi, tau, sigma)]
    result = PolySymbol.zero(sigma.context)
    for u, v, w in even:
        result = result + _associator(u, v, w, h)
    for u, v, w in odd:
        result = result - _associator(u, v, w, h)
    return result


def heisenberg_rhs(hamiltonian: PolySymbol, observable: PolySymbol, h: float) -> PolySymbol:
    """
    Time derivative of an observable symbol, (2πi/h)·qc(H, A).
    """
    h = check_planck(h)
    return qc_bracket(hamiltonian, observable, h) * (1j * TWO_PI / h)


def hamilton_rhs(hamiltonian: PolySymbol, observable: PolySymbol) -> PolySymbol:
    """
    Classical time derivative of an observable, {H, A}.
    """
    return poisson_bracket(hamiltonian, observable)


def _monomials(context: SymbolContext, slots: Sequence[int], max_degree: int) -> list[Exponent]:
    """All exponent vectors over `slots` with total degree at most `max_degree`."""
    found: list[Exponent] = []

    def walk(position: int, remaining: int, current: list[int]) -> None:
        if position == len(slots):
            found.append(tuple(current))
            return
        for power in range(remaining + 1):
            current[slots[position]] = power
            walk(position + 1, remaining - power, current)
        current[slots[position]] = 0

    walk(0, max_degree, [0] * context.size)
    return found


def _bilinear_parts(context: SymbolContext) -> list[Exponent]:
    """Classical parts 1, k'ₐ, x'ᵦ and k'ₐx'ᵦ."""
    pairs = context.pairs(Sector.CLASSICAL)
    positions = [xs for xs, _ in pairs]
    momenta = [ks for _, ks in pairs]
    zero = [0] * context.size
    parts: list[Exponent] = [tuple(zero)]
    for slot in positions + momenta:
        exp = list(zero)
        exp[slot] = 1
        parts.append(tuple(exp))
    for ks, xs in itertools.product(momenta, positions):
        exp = list(zero)
        exp[ks] = 1
        exp[xs] = 1
        parts.append(tuple(exp))
    return parts


def random_symbol(
    rng: np.random.Generator,
    context: SymbolContext,
    max_degree: int,
    n_terms: int,
    *,
    classical_bilinear: bool = False,
) -> PolySymbol:
    """
    Draw a random polynomial symbol.

    Parameters
    ----------
    rng : numpy.random.Generator
        Source of randomness.
    context : SymbolContext
        The variables the symbol may use.
    max_degree : int
        Largest total degree of a monomial.
    n_terms : int
        Number of distinct monomials (fewer if not enough exist).
    classical_bilinear : bool, optional
        Restrict each monomial's classical part to 1, k'ₐ, x'ᵦ or k'ₐx'ᵦ.

    Returns
    -------
    PolySymbol
        A symbol with coefficients drawn uniformly from the unit disk.
    """
    quantum = [slot for pair in context.pairs(Sector.QUANTUM) for slot in pair]
    if classical_bilinear:
        candidates = []
        for part in _bilinear_parts(context):
            for q_exp in _monomials(context, quantum, max(max_degree - sum(part), 0)):
                if sum(part) <= max_degree:
                    candidates.append(tuple(a + b for a, b in zip(part, q_exp)))
        candidates = sorted(set(candidates))
    else:
        candidates = _monomials(context, list(range(context.size)), max_degree)
    count = min(n_terms, len(candidates))
    chosen = rng.choice(len(candidates), size=count, replace=False)
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=count))
    angle = rng.uniform(0.0, TWO_PI, size=count)
    coefficients = radius * np.exp(1j * angle)
    return PolySymbol(
        {candidates[int(i)]: complex(c) for i, c in zip(chosen, coefficients)}, context
    )


def is_classically_bilinear(sigma: PolySymbol) -> bool:
    """True if every monomial's classical part is 1, k'ₐ, x'ᵦ or k'ₐx'ᵦ."""
    context = sigma.context
    pairs = context.pairs(Sector.CLASSICAL)
    for exp in sigma.terms:
        x_total = sum(exp[xs] for xs, _ in pairs)
        k_total = sum(exp[ks] for _, ks in pairs)
        if x_total > 1 or k_total > 1:
            return False
    return True


def symbols_from_names(context: SymbolContext, names: Iterable[str]) -> list[PolySymbol]:
    """Convenience constructor returning one variable symbol per name."""
    return [PolySymbol.variable(context, name) for name in names]
