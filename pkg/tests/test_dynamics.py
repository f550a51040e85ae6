# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Tests for the Liouville-von Neumann, mean-field and MCMF propagators.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import linalg

from qcbracket.dynamics import (
    HamiltonianSpec,
    MCMFState,
    MeanFieldState,
    MixedDensity,
    constrain_to_meanfield,
    conservation_report,
    final_hermiticity,
    lvn_rhs,
    mcmf_rhs,
    mf_rhs,
    observables,
    propagate,
    rhs_for,
    step_rk4,
)
from qcbracket.errors import (
    FactorizationError,
    InstabilityError,
    ShapeMismatchError,
    SymmetryError,
)
from qcbracket.oscillator import OscillatorConfig, exact_flow, hamiltonian_symbol
from qcbracket.spectral import Grid1D
from qcbracket.symbols import PolySymbol, SymbolContext

TWO_PI = 2 * math.pi
CLASSICAL = SymbolContext(0, 1)
KC = PolySymbol.variable(CLASSICAL, "k'0")
XC = PolySymbol.variable(CLASSICAL, "x'0")
HARMONIC = (KC**2 + XC**2) * 0.5


def harmonic(n_states: int = 1, shifts: tuple[float, ...] = (0.0,)) -> HamiltonianSpec:
    zero = PolySymbol.zero(CLASSICAL)
    return HamiltonianSpec(
        tuple(
            tuple(HARMONIC + shifts[i] * XC if i == j else zero for j in range(n_states))
            for i in range(n_states)
        )
    )


def two_level(detuning: float = 0.5, coupling: float = 0.1) -> HamiltonianSpec:
    off_diagonal = coupling * XC
    return HamiltonianSpec(
        ((HARMONIC + detuning, off_diagonal), (off_diagonal, HARMONIC - detuning))
    )


def test_state_types_have_right_hand_sides() -> None:
    spec = harmonic(2, (0.5, -0.5))
    grid = Grid1D(8, 4.0)
    states = (
        MixedDensity.gaussian([1.0, 0.0], 0.0, 0.0, grid, grid),
        MeanFieldState.pure(2, 0, 1.0, 0.0),
        MCMFState.from_meanfield(MeanFieldState.pure(2, 0, 1.0, 0.0)),
    )
    for state in states:
        increment = rhs_for(state, spec, TWO_PI)(state)
        assert type(increment) is type(state)
        assert observables(state, spec).trace == pytest.approx(1.0)


def test_unknown_state_type() -> None:
    with pytest.raises(TypeError):
        rhs_for(np.zeros(2), harmonic(), TWO_PI)
    with pytest.raises(TypeError):
        observables(np.zeros(2), harmonic())


def test_hamiltonian_must_be_hermitian() -> None:
    with pytest.raises(SymmetryError):
        HamiltonianSpec.from_matrix([[1.0, 1.0], [0.0, 1.0]])


def test_hamiltonian_evaluation() -> None:
    spec = harmonic(2, (1.0, -1.0))
    np.testing.assert_allclose(spec.evaluate(1.0, 2.0), np.diag([4.5, 0.5]))
    np.testing.assert_allclose(spec.d_position.evaluate(1.0, 2.0), np.diag([3.0, 1.0]))
    assert spec.is_diagonal
    assert not spec.is_classical_free


def test_projected_oscillator_hamiltonian() -> None:
    h = TWO_PI
    spec = HamiltonianSpec.from_symbol(hamiltonian_symbol(0.0), 4, h)
    np.testing.assert_allclose(spec.evaluate(0.0, 0.0), np.diag([0.5, 1.5, 2.5, 3.5]), atol=1e-12)
    assert HamiltonianSpec.from_json_dict(spec.to_json_dict()).n_states == 4


def test_rk4_local_error_is_fifth_order() -> None:
    spec = harmonic()
    state = MeanFieldState.pure(1, 0, 1.0, 0.0)
    errors = []
    for dt in (0.1, 0.05):
        stepped = step_rk4(state, lambda s: mf_rhs(s, spec, TWO_PI), dt)
        exact = complex(1.0, 0.0) * np.exp(1j * dt)
        errors.append(abs(complex(stepped.kc, stepped.xc) - exact))
    assert 28 < errors[0] / errors[1] < 36


def test_energy_drift_shrinks_with_step() -> None:
    spec = harmonic()
    state = MeanFieldState.pure(1, 0, 1.0, 0.5)
    drifts = [
        propagate(state, spec, TWO_PI, dt, round(10 / dt)).drift("energy") for dt in (0.1, 0.05)
    ]
    assert drifts[0] / drifts[1] >= 12


@pytest.mark.parametrize("alpha", [0.0, 1.5])
def test_meanfield_follows_hamilton_flow(alpha: float) -> None:
    h = TWO_PI
    cfg = OscillatorConfig(alpha, 1.0 + 0j, 2)
    spec = HamiltonianSpec.from_symbol(hamiltonian_symbol(cfg), cfg.n_quantum + 25, h)
    state = MeanFieldState.pure(spec.n_states, cfg.n_quantum, 1.0, 0.0)
    n_steps = 1200
    series = propagate(state, spec, h, TWO_PI / n_steps, n_steps)
    _, expected = exact_flow(cfg.alpha, math.pi, 0j, cfg.z0_classical)
    final = series.final
    assert abs(complex(final.kc, final.xc) - expected) < 1e-5
    assert abs(complex(final.kc, final.xc) - cfg.z0_classical) < 1e-5
    report = conservation_report(series)
    assert report["trace_drift"] < 1e-8
    assert report["relative_energy_drift"] < 1e-6


def test_single_state_mcmf_equals_meanfield() -> None:
    spec = HamiltonianSpec(((HARMONIC + 0.3 * XC**3,),))
    state = MeanFieldState.pure(1, 0, 0.7, -0.2)
    meanfield = propagate(state, spec, TWO_PI, 0.01, 300)
    mcmf = propagate(MCMFState.from_meanfield(state), spec, TWO_PI, 0.01, 300)
    for name in ("t", "trace", "energy", "mean_k", "mean_x"):
        np.testing.assert_array_equal(meanfield.column(name), mcmf.column(name))


def test_mcmf_conserves_energy() -> None:
    spec = two_level()
    state = MCMFState.from_meanfield(MeanFieldState(np.array([0.6, 0.8]), 1.0, 0.0))
    report = conservation_report(propagate(state, spec, TWO_PI, 0.01, 1000))
    assert report["relative_energy_drift"] < 1e-6
    assert report["trace_drift"] < 1e-9


def test_mcmf_energy_drift_shrinks_with_step() -> None:
    spec = two_level()
    state = MCMFState.from_meanfield(MeanFieldState(np.array([0.6, 0.8]), 1.0, 0.5))
    drifts = [
        propagate(state, spec, TWO_PI, dt, round(10 / dt)).drift("energy") for dt in (0.1, 0.05)
    ]
    assert drifts[0] / drifts[1] >= 10


def test_mcmf_diagonal_configurations_are_independent() -> None:
    h = TWO_PI
    spec = harmonic(2, (0.5, -0.5))
    dt, n_steps = 0.01, 300
    state = MCMFState.from_meanfield(MeanFieldState(np.array([0.6, 0.8]), 1.0, 0.0))
    final = propagate(state, spec, h, dt, n_steps).final
    for index in range(2):
        single = propagate(MeanFieldState.pure(2, index, 1.0, 0.0), spec, h, dt, n_steps).final
        assert final.kc[index, index] == pytest.approx(single.kc, abs=1e-12)
        assert final.xc[index, index] == pytest.approx(single.xc, abs=1e-12)


def test_mcmf_off_diagonal_points_stay_averaged() -> None:
    state = MCMFState.from_meanfield(MeanFieldState(np.array([0.6, 0.8j]), 1.0, 0.0))
    final = propagate(state, two_level(coupling=0.3), TWO_PI, 0.01, 500).final
    assert final.kc[0, 0] != pytest.approx(final.kc[1, 1], abs=1e-3)
    assert final.kc[0, 1] == pytest.approx((final.kc[0, 0] + final.kc[1, 1]) / 2, abs=1e-12)
    assert final.xc[0, 1] == pytest.approx((final.xc[0, 0] + final.xc[1, 1]) / 2, abs=1e-12)
    final.check_symmetric()


def test_mcmf_empty_configuration_feels_no_coherence_force() -> None:
    spec = two_level(coupling=0.3)
    state = MCMFState.from_meanfield(MeanFieldState.pure(2, 0, 1.0, 0.0))
    increment = mcmf_rhs(state, spec, TWO_PI)
    assert np.all(np.isfinite(increment.kc))
    assert increment.kc[1, 1] == pytest.approx(-spec.d_position.evaluate(1.0, 0.0)[1, 1].real)


def lvn_energy_rate(grid: Grid1D, spec: HamiltonianSpec, h: float) -> float:
    rho = MixedDensity.gaussian([0.6, 0.8, 0.0], 0.37, -0.61, grid, grid, width=0.7)
    return abs(observables(lvn_rhs(rho, spec, h), spec).energy)


def test_lvn_energy_rate_vanishes_on_resolved_grids() -> None:
    h = TWO_PI
    spec = HamiltonianSpec.from_symbol(hamiltonian_symbol(1.5), 3, h)
    fine = lvn_energy_rate(Grid1D(64, 14.0), spec, h)
    coarse = lvn_energy_rate(Grid1D(32, 14.0), spec, h)
    assert fine < 1e-9
    assert fine < coarse


def test_lvn_conserves_energy() -> None:
    grid = Grid1D(64, 20.0)
    rho = MixedDensity.gaussian([0.6, 0.8], 1.0, 0.0, grid, grid, width=1.0)
    series = propagate(rho, two_level(), TWO_PI, 0.005, 300)
    report = conservation_report(series, final_hermiticity(series.final))
    assert report["relative_energy_drift"] < 1e-6
    assert report["trace_drift"] < 1e-8
    assert report["hermiticity"] < 1e-10


def test_mcmf_needs_symmetric_points() -> None:
    state = MCMFState(np.eye(2) / 2, [[0.0, 1.0], [0.0, 0.0]], np.zeros((2, 2)))
    with pytest.raises(SymmetryError):
        state.check_symmetric()


def test_lvn_matches_von_neumann() -> None:
    h = TWO_PI
    matrix = np.array([[1.0, 0.5 - 0.2j], [0.5 + 0.2j, -1.0]])
    spec = HamiltonianSpec.from_matrix(matrix)
    grid = Grid1D(16, 8.0)
    rho = MixedDensity.gaussian([1.0, 0.0], 0.5, -0.5, grid, grid)
    dt, n_steps = 0.005, 400
    series = propagate(rho, spec, h, dt, n_steps)
    unitary = linalg.expm(-1j * TWO_PI / h * matrix * dt * n_steps)
    expected = unitary @ rho.integrated() @ unitary.conj().T
    np.testing.assert_allclose(series.final.integrated(), expected, atol=1e-8)
    assert final_hermiticity(series.final) < 1e-10
    assert series.drift("trace") < 1e-8


def test_rotating_gaussian() -> None:
    grid = Grid1D(64, 12.0)
    rho = MixedDensity.gaussian([1.0], 1.5, 0.0, grid, grid)
    n_steps = 160
    series = propagate(rho, harmonic(), TWO_PI, (math.pi / 2) / n_steps, n_steps)
    record = series.records[-1]
    assert record.mean_k == pytest.approx(0.0, abs=1e-4)
    assert record.mean_x == pytest.approx(1.5, abs=1e-4)
    assert series.drift("trace") < 1e-8


def test_adiabatic_centroids_follow_meanfield() -> None:
    h = TWO_PI
    spec = harmonic(2, (0.5, -0.5))
    grid = Grid1D(64, 12.0)
    n_steps = 160
    dt = (math.pi / 2) / n_steps
    rho = MixedDensity.gaussian([1.0, 1.0], 1.0, 0.0, grid, grid)
    final = propagate(rho, spec, h, dt, n_steps).final
    for index in range(2):
        single = propagate(MeanFieldState.pure(2, index, 1.0, 0.0), spec, h, dt, n_steps).final
        k, x = final.centroid(index)
        assert k == pytest.approx(single.kc, abs=1e-4)
        assert x == pytest.approx(single.xc, abs=1e-4)


@pytest.mark.parametrize(("alpha", "moves"), [(0.0, False), (1.5, True)])
def test_lvn_transitions(alpha: float, moves: bool) -> None:  # noqa: FBT001
    h = TWO_PI
    n_quantum = 2
    spec = HamiltonianSpec.from_symbol(hamiltonian_symbol(alpha), 6, h)
    grid = Grid1D(32, 10.0)
    amplitudes = np.zeros(6)
    amplitudes[n_quantum] = 1.0
    rho = MixedDensity.gaussian(amplitudes, 1.0, 0.0, grid, grid)
    n_steps = 200
    series = propagate(rho, spec, h, math.pi / n_steps, n_steps)
    downward = sum(series.records[-1].populations[:n_quantum])
    if moves:
        assert downward > 1e-4
    else:
        assert downward < 1e-6
    assert final_hermiticity(series.final) < 1e-10
    assert series.drift("trace") < 1e-8


def test_lvn_rejects_mismatched_states() -> None:
    grid = Grid1D(8, 4.0)
    rho = MixedDensity.gaussian([1.0, 0.0], 0.0, 0.0, grid, grid)
    with pytest.raises(ShapeMismatchError):
        lvn_rhs(rho, harmonic(), 1.0)


def test_constrain_pure_density() -> None:
    grid = Grid1D(32, 8.0)
    rho = MixedDensity.gaussian([0.6, 0.8j], 0.5, -0.25, grid, grid, width=0.5)
    state = constrain_to_meanfield(rho)
    np.testing.assert_allclose(np.abs(state.c), [0.6, 0.8], atol=1e-12)
    assert state.kc == pytest.approx(0.5, abs=1e-6)
    assert state.xc == pytest.approx(-0.25, abs=1e-6)


def test_constrain_mixed_density_fails() -> None:
    grid = Grid1D(16, 8.0)
    rho = MixedDensity.product(np.eye(2) / 2, 0.0, 0.0, grid, grid)
    with pytest.raises(FactorizationError):
        constrain_to_meanfield(rho)


def test_instability_reports_step() -> None:
    state = MeanFieldState.pure(1, 0, 0.0, 0.0)

    def explode(current: MeanFieldState) -> MeanFieldState:
        return MeanFieldState(current.c, math.inf, 0.0)

    with pytest.raises(InstabilityError) as info:
        propagate(state, harmonic(), TWO_PI, 0.1, 5, rhs=explode)
    assert info.value.step == 1


def test_overflowing_observables_report_step() -> None:
    grid = Grid1D(16, 8.0)
    rho = MixedDensity.gaussian([1.0], 1.0, 1.0, grid, grid)

    def blow_up(current: MixedDensity) -> MixedDensity:
        return MixedDensity(1e50 * current.rho, current.k_grid, current.x_grid)

    with pytest.raises(InstabilityError) as info:
        propagate(rho, harmonic(), TWO_PI, 1.0, 3, rhs=blow_up)
    assert info.value.step == 1


def test_moments_of_a_huge_density_are_infinite() -> None:
    grid = Grid1D(16, 8.0)
    rho = MixedDensity.gaussian([1.0], 1.0, 1.0, grid, grid)
    huge = MixedDensity(1e200 * rho.rho, grid, grid)
    mean_k, _, var_k, _ = huge.moments()
    assert math.isfinite(mean_k)
    assert not math.isfinite(var_k)
    assert not observables(huge, harmonic()).is_finite()


def test_snapshots_follow_stride() -> None:
    state = MeanFieldState.pure(1, 0, 1.0, 0.0)
    series = propagate(state, harmonic(), TWO_PI, 0.1, 10, snapshot_stride=4)
    assert [step for step, _, _ in series.snapshots] == [0, 4, 8]
    assert len(series.records) == 11
