# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Run and verification configurations.

A configuration is one JSON document. Every key is optional; missing keys
take the defaults below and `to_json_dict` writes the completed document
back out, so each run can echo exactly what it used. A simulation document
looks like::

    {
      "scheme": "meanfield",
      "h": 6.283185307179586,
      "dt": 0.005,
      "n_steps": 1257,
      "snapshot_stride": 0,
      "seed": 0,
      "oscillator": {"alpha": 1.5, "z0_classical": [1.0, 0.0], "n_quantum": 2},
      "hamiltonian": {"type": "oscillator", "n_states": 27},
      "initial_state": {"index": 2, "kc": 1.0, "xc": 0.0, "width": null},
      "grid": {"n_points": 64, "extent": 12.0},
      "schemes": ["meanfield", "oscillator_analytic"],
      "output_dir": null
    }

Hamiltonians of type ``matrix`` carry ``entries``, a square matrix of
polynomial symbol documents in (x'0, k'0); type ``symbol`` carries one
``symbol`` document in (x0, k0, x'0, k'0) that is projected onto
``n_states`` oscillator states.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

from typing_extensions import Self

from ._common import TWO_PI
from .dynamics import HamiltonianSpec, MCMFState, MeanFieldState, MixedDensity
from .errors import ConfigError, OscillatorError, QCBracketError
from .identities import DEFAULT_H_SWEEP, IDENTITY_NAMES
from .oscillator import OscillatorConfig, hamiltonian_symbol
from .settings import DEFAULT_VERIFY_SEED, DEFAULT_VERIFY_TRIALS
from .spectral import Grid1D
from .symbols import PolySymbol

if TYPE_CHECKING:
    from collections.abc import Mapping

logger = logging.getLogger(__name__)

EXTRA_FOCK_STATES = 25
"""Oscillator states kept above the initial Fock label by default."""


class Scheme(Enum):
    """
    Propagation schemes a run can use.
    """

    LVN = "lvn"
    MEANFIELD = "meanfield"
    MCMF = "mcmf"
    OSCILLATOR_ANALYTIC = "oscillator_analytic"


def load_json(path: str | Path) -> dict[str, Any]:
    """
    Read a configuration document.

    Raises
    ------
    ConfigError
        If the file cannot be read or is not a JSON object.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        msg = f"cannot read configuration {path}: {err}"
        raise ConfigError(msg) from err
    if not isinstance(data, dict):
        msg = f"configuration {path} must hold a JSON object"
        raise ConfigError(msg)
    return data


def _section(data: Mapping[str, Any], key: str) -> dict[str, Any]:
    value = data.get(key) or {}
    if not isinstance(value, dict):
        msg = f"'{key}' must be a JSON object"
        raise ConfigError(msg)
    return value


def _check_keys(data: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        msg = f"unknown keys in {where}: {', '.join(unknown)}"
        raise ConfigError(msg)


def _number(data: Mapping[str, Any], key: str, default: float, *, positive: bool = True) -> float:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        msg = f"'{key}' must be a finite number, got {value!r}"
        raise ConfigError(msg)
    if positive and value <= 0:
        msg = f"'{key}' must be positive, got {value!r}"
        raise ConfigError(msg)
    return float(value)


def _integer(data: Mapping[str, Any], key: str, default: int, minimum: int = 0) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        msg = f"'{key}' must be an integer of at least {minimum}, got {value!r}"
        raise ConfigError(msg)
    return value


def _complex(value: Any, key: str) -> complex:
    """Accept [re, im] pairs or plain numbers."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:  # noqa: PLR2004
        return complex(float(value[0]), float(value[1]))
    msg = f"'{key}' must be a number or an [re, im] pair, got {value!r}"
    raise ConfigError(msg)


@dataclass(frozen=True)
class GridConfig:
    """
    Classical phase-space grid, shared by k' and x'.
    """

    n_points: int = 64
    """Points per axis, a power of two."""
    extent: float = 12.0
    """Box length per axis, centred on zero."""

    def grid(self) -> Grid1D:
        """
        The grid as a `Grid1D`.

        Raises
        ------
        ConfigError
            If the point count is not a power of two of at least 8.
        """
        try:
            return Grid1D(self.n_points, self.extent)
        except QCBracketError as err:
            raise ConfigError(str(err)) from err

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> Self:
        """Parse the ``grid`` section."""
        _check_keys(data, {"n_points", "extent"}, "grid")
        cfg = cls(_integer(data, "n_points", cls.n_points, 8), _number(data, "extent", cls.extent))
        cfg.grid()
        return cfg


@dataclass(frozen=True)
class InitialState:
    """
    Initial quantum state and classical point.

    Unset fields are filled in from the oscillator section.
    """

    index: int | None = None
    """Basis state to start in, when no amplitudes are given."""
    amplitudes: tuple[complex, ...] | None = None
    """Explicit amplitudes, normalized before use."""
    kc: float | None = None
    """Classical momentum."""
    xc: float | None = None
    """Classical position."""
    width: float | None = None
    """Width of the classical Gaussian for grid schemes; four spacings if unset."""

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> Self:
        """Parse the ``initial_state`` section."""
        _check_keys(data, {"index", "amplitudes", "kc", "xc", "width"}, "initial_state")
        amplitudes = data.get("amplitudes")
        return cls(
            None if data.get("index") is None else _integer(data, "index", 0),
            None if amplitudes is None else tuple(_complex(a, "amplitudes") for a in amplitudes),
            None if data.get("kc") is None else _number(data, "kc", 0.0, positive=False),
            None if data.get("xc") is None else _number(data, "xc", 0.0, positive=False),
            None if data.get("width") is None else _number(data, "width", 1.0),
        )

    def to_json_dict(self) -> dict[str, Any]:
        """The section with amplitudes as [re, im] pairs."""
        return {
            "index": self.index,
            "amplitudes": None
            if self.amplitudes is None
            else [[a.real, a.imag] for a in self.amplitudes],
            "kc": self.kc,
            "xc": self.xc,
            "width": self.width,
        }


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a simulate, oscillator or compare run needs.
    """

    scheme: Scheme = Scheme.MEANFIELD
    """Propagation scheme."""
    h: float = TWO_PI
    """Planck's constant."""
    dt: float = 0.005
    """Time step in Hamilton time."""
    n_steps: int = 1000
    """Number of steps."""
    snapshot_stride: int = 0
    """Write a full-state snapshot every this many steps; 0 writes none."""
    seed: int = 0
    """Recorded for reproducibility; propagation itself is deterministic."""
    oscillator: OscillatorConfig = field(default_factory=OscillatorConfig)
    """Coupled-oscillator parameters and initial Fock state."""
    hamiltonian: dict[str, Any] = field(default_factory=lambda: {"type": "oscillator"})
    """Hamiltonian document (type oscillator, matrix or symbol)."""
    initial_state: InitialState = field(default_factory=InitialState)
    """Initial state descriptor."""
    grid: GridConfig = field(default_factory=GridConfig)
    """Classical grid of the Liouville-von Neumann scheme."""
    schemes: tuple[Scheme, Scheme] = (Scheme.MEANFIELD, Scheme.OSCILLATOR_ANALYTIC)
    """The two schemes run by ``compare``."""
    output_dir: str | None = None
    """Output directory, overridden by the environment and the command line."""

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> Self:
        """
        Parse and validate a run document.

        Raises
        ------
        ConfigError
            On unknown keys, wrong types or values out of range.
        """
        _check_keys(data, {f.name for f in fields(cls)}, "the run configuration")
        osc = _section(data, "oscillator")
        _check_keys(osc, {"alpha", "z0_classical", "n_quantum"}, "oscillator")
        try:
            oscillator = OscillatorConfig(
                _number(osc, "alpha", 0.0, positive=False),
                _complex(osc.get("z0_classical", 0.0), "z0_classical"),
                _integer(osc, "n_quantum", 0),
            )
        except OscillatorError as err:
            raise ConfigError(str(err)) from err
        hamiltonian = _section(data, "hamiltonian") or {"type": "oscillator"}
        if hamiltonian.get("type", "oscillator") not in {"oscillator", "matrix", "symbol"}:
            msg = f"unknown hamiltonian type {hamiltonian.get('type')!r}"
            raise ConfigError(msg)
        cfg = cls(
            scheme=_scheme(data.get("scheme", cls.scheme.value)),
            h=_number(data, "h", cls.h),
            dt=_number(data, "dt", cls.dt),
            n_steps=_integer(data, "n_steps", cls.n_steps, 1),
            snapshot_stride=_integer(data, "snapshot_stride", cls.snapshot_stride),
            seed=_integer(data, "seed", cls.seed),
            oscillator=oscillator,
            hamiltonian={"type": "oscillator", **hamiltonian},
            initial_state=InitialState.from_json_dict(_section(data, "initial_state")),
            grid=GridConfig.from_json_dict(_section(data, "grid")),
            schemes=_scheme_pair(data.get("schemes", [s.value for s in cls.schemes])),
            output_dir=data.get("output_dir"),
        )
        cfg.build_hamiltonian()
        return cfg

    def to_json_dict(self) -> dict[str, Any]:
        """The effective configuration, with every default filled in."""
        z0 = self.oscillator.z0_classical
        return {
            "scheme": self.scheme.value,
            "h": self.h,
            "dt": self.dt,
            "n_steps": self.n_steps,
            "snapshot_stride": self.snapshot_stride,
            "seed": self.seed,
            "oscillator": {
                "alpha": self.oscillator.alpha,
                "z0_classical": [z0.real, z0.imag],
                "n_quantum": self.oscillator.n_quantum,
            },
            "hamiltonian": {**self.hamiltonian, "n_states": self.n_states},
            "initial_state": self.initial_state.to_json_dict(),
            "grid": {"n_points": self.grid.n_points, "extent": self.grid.extent},
            "schemes": [s.value for s in self.schemes],
            "output_dir": self.output_dir,
        }

    @property
    def n_states(self) -> int:
        """Size of the quantum basis."""
        kind = self.hamiltonian["type"]
        if kind == "matrix":
            return len(self.hamiltonian.get("entries") or [])
        return int(
            self.hamiltonian.get("n_states", self.oscillator.n_quantum + EXTRA_FOCK_STATES)
        )

    def build_hamiltonian(self) -> HamiltonianSpec:
        """
        The Hamiltonian matrix described by the ``hamiltonian`` section.

        Raises
        ------
        ConfigError
            If the section does not describe a valid Hermitian matrix.
        """
        kind = self.hamiltonian["type"]
        try:
            if kind == "matrix":
                entries = self.hamiltonian.get("entries")
                if not entries:
                    msg = "a matrix hamiltonian needs 'entries'"
                    raise ConfigError(msg)
                return HamiltonianSpec.from_json_dict({"entries": entries})
            if kind == "symbol":
                symbol = PolySymbol.from_json_dict(self.hamiltonian["symbol"])
            else:
                symbol = hamiltonian_symbol(self.oscillator)
            return HamiltonianSpec.from_symbol(symbol, self.n_states, self.h)
        except ConfigError:
            raise
        except (QCBracketError, KeyError, TypeError, ValueError) as err:
            msg = f"invalid hamiltonian: {err}"
            raise ConfigError(msg) from err

    def amplitudes(self) -> list[complex]:
        """
        Initial amplitudes over the basis.

        Raises
        ------
        ConfigError
            If the state does not fit the basis or vanishes.
        """
        n = self.n_states
        given = self.initial_state.amplitudes
        if given is not None:
            if len(given) != n or not any(given):
                msg = f"initial amplitudes need {n} entries, not all zero"
                raise ConfigError(msg)
            return list(given)
        index = self.initial_state.index
        index = self.oscillator.n_quantum if index is None else index
        if not 0 <= index < n:
            msg = f"initial state index {index} is outside the {n}-state basis"
            raise ConfigError(msg)
        return [1.0 if i == index else 0.0 for i in range(n)]

    def classical_point(self) -> tuple[float, float]:
        """Initial (k', x'), defaulting to the oscillator's z'₀ = k' + ix'."""
        z0 = self.oscillator.z0_classical
        kc = self.initial_state.kc
        xc = self.initial_state.xc
        return (z0.real if kc is None else kc, z0.imag if xc is None else xc)

    def initial(self, scheme: Scheme) -> MixedDensity | MeanFieldState | MCMFState:
        """
        The initial state for one of the propagated schemes.

        Raises
        ------
        ConfigError
            For the analytic scheme, which has no propagated state.
        """
        amplitudes = self.amplitudes()
        kc, xc = self.classical_point()
        if scheme == Scheme.LVN:
            grid = self.grid.grid()
            return MixedDensity.gaussian(amplitudes, kc, xc, grid, grid, self.initial_state.width)
        norm = math.sqrt(sum(abs(a) ** 2 for a in amplitudes))
        state = MeanFieldState([a / norm for a in amplitudes], kc, xc)
        if scheme == Scheme.MEANFIELD:
            return state
        if scheme == Scheme.MCMF:
            return MCMFState.from_meanfield(state)
        msg = f"scheme {scheme.value} has no propagated state"
        raise ConfigError(msg)


def _scheme(value: Any) -> Scheme:
    try:
        return Scheme(value)
    except ValueError as err:
        choices = ", ".join(s.value for s in Scheme)
        msg = f"unknown scheme {value!r}; choose one of {choices}"
        raise ConfigError(msg) from err


def _scheme_pair(value: Any) -> tuple[Scheme, Scheme]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:  # noqa: PLR2004
        msg = "'schemes' must list exactly two schemes"
        raise ConfigError(msg)
    return _scheme(value[0]), _scheme(value[1])


@dataclass(frozen=True)
class VerifyConfig:
    """
    Settings of the identity suite.
    """

    identities: tuple[str, ...] = IDENTITY_NAMES
    """Identities to check, in report order."""
    trials: int = DEFAULT_VERIFY_TRIALS
    """Random instances per symbolic check."""
    seed: int = DEFAULT_VERIFY_SEED
    """Seed of the shared random generator, echoed in the report."""
    h_sweep: tuple[float, ...] = DEFAULT_H_SWEEP
    """Planck constants of the classical-limit fit."""
    composition_trials: int | None = None
    """Random pairs of the grid composition check; derived from `trials` if unset."""
    composition_points: int = 256
    """Grid size of the composition check."""
    max_degree: int | None = None
    """Degree bound of the random symbols; each identity keeps its own default if unset."""

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any], **overrides: Any) -> Self:
        """
        Parse a ``verify`` document; non-None keyword overrides win.

        Raises
        ------
        ConfigError
            On unknown identities, keys or values out of range.
        """
        _check_keys(data, {f.name for f in fields(cls)}, "the verify configuration")
        merged = {**data, **{k: v for k, v in overrides.items() if v is not None}}
        identities = merged.get("identities", list(cls.identities))
        if isinstance(identities, str):
            identities = [identities]
        unknown = sorted(set(identities) - set(IDENTITY_NAMES))
        if unknown or not identities:
            msg = f"unknown identities: {', '.join(unknown) or '(none given)'}"
            raise ConfigError(msg)
        sweep = merged.get("h_sweep", list(cls.h_sweep))
        if len(sweep) < 2 or any(  # noqa: PLR2004
            isinstance(h, bool) or not isinstance(h, (int, float)) or h <= 0 for h in sweep
        ):
            msg = "'h_sweep' needs at least two positive values"
            raise ConfigError(msg)
        composition_trials = merged.get("composition_trials")
        return cls(
            tuple(name for name in IDENTITY_NAMES if name in identities),
            _integer(merged, "trials", cls.trials, 1),
            _integer(merged, "seed", cls.seed),
            tuple(float(h) for h in sweep),
            None
            if composition_trials is None
            else _integer(merged, "composition_trials", 1, 1),
            _integer(merged, "composition_points", cls.composition_points, 8),
            None if merged.get("max_degree") is None else _integer(merged, "max_degree", 1, 1),
        )

    def to_json_dict(self) -> dict[str, Any]:
        """The effective configuration, seed included."""
        return {
            "identities": list(self.identities),
            "trials": self.trials,
            "seed": self.seed,
            "h_sweep": list(self.h_sweep),
            "composition_trials": self.composition_trials,
            "composition_points": self.composition_points,
            "max_degree": self.max_degree,
        }
