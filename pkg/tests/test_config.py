# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Tests for run and verification configurations.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from qcbracket.config import (
    EXTRA_FOCK_STATES,
    GridConfig,
    RunConfig,
    Scheme,
    VerifyConfig,
    load_json,
)
from qcbracket.dynamics import MCMFState, MeanFieldState, MixedDensity
from qcbracket.errors import ConfigError
from qcbracket.identities import IDENTITY_NAMES
from qcbracket.settings import DEFAULT_VERIFY_SEED

OSCILLATOR = {"alpha": 1.5, "z0_classical": [1.0, 0.5], "n_quantum": 2}


def test_defaults() -> None:
    cfg = RunConfig.from_json_dict({})
    assert cfg.scheme == Scheme.MEANFIELD
    assert cfg.h == pytest.approx(2 * math.pi)
    assert cfg.n_states == EXTRA_FOCK_STATES
    assert cfg.schemes == (Scheme.MEANFIELD, Scheme.OSCILLATOR_ANALYTIC)


def test_oscillator_section() -> None:
    cfg = RunConfig.from_json_dict({"oscillator": OSCILLATOR})
    assert cfg.oscillator.z0_classical == 1.0 + 0.5j
    assert cfg.n_states == 2 + EXTRA_FOCK_STATES
    assert cfg.classical_point() == (1.0, 0.5)
    amplitudes = cfg.amplitudes()
    assert amplitudes[2] == 1.0
    assert sum(amplitudes) == 1.0


def test_effective_config_is_complete() -> None:
    data = RunConfig.from_json_dict({"oscillator": OSCILLATOR, "dt": 0.01}).to_json_dict()
    assert data["hamiltonian"] == {"type": "oscillator", "n_states": 27}
    assert data["oscillator"]["z0_classical"] == [1.0, 0.5]
    again = RunConfig.from_json_dict(json.loads(json.dumps(data)))
    assert again.to_json_dict() == data


@pytest.mark.parametrize(
    "document",
    [
        {"stepsize": 0.1},
        {"scheme": "euler"},
        {"dt": -0.01},
        {"dt": "fast"},
        {"n_steps": 0},
        {"grid": {"n_points": 100}},
        {"oscillator": {"alpha": -0.5}},
        {"oscillator": {"n_quantum": 3}, "hamiltonian": {"n_states": 3}},
        {"schemes": ["lvn"]},
        {"hamiltonian": {"type": "table"}},
        {"hamiltonian": {"type": "matrix", "entries": []}},
    ],
)
def test_invalid_documents(document: dict) -> None:
    with pytest.raises(ConfigError):
        RunConfig.from_json_dict(document).amplitudes()


def test_matrix_hamiltonian() -> None:
    constant = {"vars": ["x'0", "k'0"], "terms": [{"exp": [0, 0], "re": 1.0, "im": 0.0}]}
    zero = {"vars": ["x'0", "k'0"], "terms": []}
    cfg = RunConfig.from_json_dict(
        {
            "hamiltonian": {"type": "matrix", "entries": [[constant, zero], [zero, constant]]},
            "initial_state": {"amplitudes": [[1.0, 0.0], [0.0, 1.0]]},
        }
    )
    assert cfg.n_states == 2
    np.testing.assert_allclose(cfg.build_hamiltonian().evaluate(0.3, 0.1), np.eye(2))
    state = cfg.initial(Scheme.MEANFIELD)
    np.testing.assert_allclose(state.c, np.array([1.0, 1.0j]) / math.sqrt(2))


def test_asymmetric_matrix_is_rejected() -> None:
    one = {"vars": ["x'0", "k'0"], "terms": [{"exp": [0, 0], "re": 1.0, "im": 0.0}]}
    zero = {"vars": ["x'0", "k'0"], "terms": []}
    with pytest.raises(ConfigError, match="invalid hamiltonian"):
        RunConfig.from_json_dict(
            {"hamiltonian": {"type": "matrix", "entries": [[one, one], [zero, one]]}}
        )


def test_initial_states_per_scheme() -> None:
    cfg = RunConfig.from_json_dict(
        {
            "oscillator": OSCILLATOR,
            "hamiltonian": {"n_states": 4},
            "grid": {"n_points": 16, "extent": 8.0},
        }
    )
    assert isinstance(cfg.initial(Scheme.LVN), MixedDensity)
    assert isinstance(cfg.initial(Scheme.MEANFIELD), MeanFieldState)
    mcmf = cfg.initial(Scheme.MCMF)
    assert isinstance(mcmf, MCMFState)
    assert mcmf.varrho[2, 2] == 1.0
    with pytest.raises(ConfigError):
        cfg.initial(Scheme.OSCILLATOR_ANALYTIC)


def test_grid_config() -> None:
    assert GridConfig.from_json_dict({"n_points": 32}).grid().n_points == 32
    with pytest.raises(ConfigError):
        GridConfig(12, 4.0).grid()


def test_load_json(tmp_path) -> None:
    path = tmp_path / "run.json"
    path.write_text('{"dt": 0.01}', encoding="utf-8")
    assert load_json(path) == {"dt": 0.01}
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON object"):
        load_json(path)
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_json(path)
    with pytest.raises(ConfigError):
        load_json(tmp_path / "missing.json")


def test_verify_defaults() -> None:
    cfg = VerifyConfig.from_json_dict({})
    assert cfg.identities == IDENTITY_NAMES
    assert cfg.seed == DEFAULT_VERIFY_SEED
    assert cfg.to_json_dict()["max_degree"] is None


def test_verify_overrides_win() -> None:
    cfg = VerifyConfig.from_json_dict(
        {"trials": 50, "seed": 3, "identities": ["jacobi", "antisymmetry"]},
        trials=5,
        seed=None,
        identities=None,
    )
    assert cfg.trials == 5
    assert cfg.seed == 3
    assert cfg.identities == ("antisymmetry", "jacobi")


@pytest.mark.parametrize(
    "document",
    [
        {"identities": ["symmetry"]},
        {"identities": []},
        {"h_sweep": [0.1]},
        {"h_sweep": [0.1, -0.01]},
        {"trials": 0},
        {"max_degree": 0},
        {"bogus": 1},
    ],
)
def test_invalid_verify_documents(document: dict) -> None:
    with pytest.raises(ConfigError):
        VerifyConfig.from_json_dict(document)
