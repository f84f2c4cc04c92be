import numpy as np
import pytest
import scipy.integrate
import scipy.linalg
from numpy.testing import assert_allclose

from src.diagnostics import physical_end_index
from src.models import hamiltonian_at
from src.oracle import oracle_propagate
from src.timegrid import make_time_grid
from src.utils.errors import InvalidInputError, ResonantDenominatorError
from src.waveop import (STATUS_CONVERGED, STATUS_DIVERGED, STATUS_STALLED, ActiveSpace,
                        ReducedWaveOperator, SolveOptions, choose_energy_shift, convergence_factor,
                        dressed_diagonal, effective_hamiltonian, increment, propagate_columns,
                        propagate_effective, propagate_state, residual, solve)
from src.waveop.increment import check_denominators, nearest_denominators
from src.tests.test_utils import build_from_config, random_hermitian, solved_toy6, toy6_config


@pytest.fixture(scope="module")
def toy6():
    return build_from_config(toy6_config())


def _random_blocks(n_time, active, seed=1, scale=0.1):
    rng = np.random.default_rng(seed)
    shape = (n_time, active.size, active.m)
    blocks = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    blocks[:, active.index_array, :] = 0.0
    return blocks


def test_active_space_projections():
    active = ActiveSpace.from_indices([3, 1], 5)
    assert active.m == 2
    assert active.indices == (3, 1)
    assert active.complement.tolist() == [0, 2, 4]
    embedding = active.embedding()
    assert embedding[3, 0] == 1 and embedding[1, 1] == 1 and embedding.sum() == 2
    lifted = active.embed(np.array([[[1.0], [2.0]]]))
    assert lifted[0, 3, 0] == 1.0 and lifted[0, 1, 0] == 2.0


@pytest.mark.parametrize("indices", [[], [0, 0], [5], [-1]])
def test_active_space_rejects_bad_indices(indices):
    with pytest.raises(InvalidInputError):
        ActiveSpace.from_indices(indices, 5)


@pytest.mark.parametrize("options", [
    {"eps": 0.0},
    {"eps": -1e-7},
    {"max_iterations": 0},
    {"magnus_order": 3},
    {"workers": 0},
    {"divergence_bound": 0.0},
])
def test_solve_options_validation(options):
    with pytest.raises(InvalidInputError):
        SolveOptions(**options)


def test_convergence_factor_edge_cases():
    assert convergence_factor(0.0, 0.0) == 0.0
    assert convergence_factor(1.0, 0.0) == float("inf")
    assert_allclose(convergence_factor(1e-3, 1e-1), 1e-4)


def test_effective_hamiltonian_without_wave_operator(toy6):
    model, grid, active = toy6
    heff = effective_hamiltonian(np.zeros((grid.n_time, 6, 2), dtype=complex), model, grid, active)
    for j in (0, 170, 300):
        dense = hamiltonian_at(model, active, grid.times[j])
        assert_allclose(heff[j], dense[np.ix_([0, 1], [0, 1])], atol=1e-14)


def test_residual_without_wave_operator_is_the_coupling_block(toy6):
    model, grid, active = toy6
    delta = residual(ReducedWaveOperator.zeros(grid, active), model, grid, active)
    for j in (0, 170, 300):
        dense = hamiltonian_at(model, active, grid.times[j])
        expected = dense[:, [0, 1]].copy()
        expected[[0, 1], :] = 0.0
        assert_allclose(delta[j], expected, atol=1e-14)


def test_residual_vanishes_without_pulses(toy6):
    model, grid, active = toy6
    delta = residual(ReducedWaveOperator.zeros(grid, active), model.without_pulses(), grid, active)
    assert not np.any(delta)


def test_dressed_diagonal_without_pulses_is_the_complement_energies(toy6):
    model, grid, active = toy6
    quiet = model.without_pulses()
    diagonal = dressed_diagonal(np.zeros((grid.n_time, 6, 2), dtype=complex), quiet, grid, active)
    before = grid.times <= 100.0
    assert_allclose(diagonal[before][:, 2:], np.broadcast_to(quiet.energies[2:], (before.sum(), 4)))
    assert not np.any(diagonal[:, :2])
    # past T0 the absorber shows up as -i V_opt
    assert_allclose(diagonal[-1, 2:].imag, -quiet.absorber_value(grid.times[-1]))


def test_dressed_diagonal_matches_elementwise_formula(toy6):
    model, grid, active = toy6
    blocks = _random_blocks(grid.n_time, active)
    diagonal = dressed_diagonal(blocks, model, grid, active)
    mu, eps = model.dipole, model.energies
    for j in (10, 200, 500):
        t = grid.times[j]
        field = float(model.field(t))
        for q in active.complement:
            dressing = sum(blocks[j, q, k] * mu[p, q] for k, p in enumerate(active.indices))
            expected = eps[q] - field * mu[q, q] + field * dressing - 1j * float(model.absorber_value(t))
            assert_allclose(diagonal[j, q], expected, atol=1e-14)


def test_propagation_of_constant_diagonal_series():
    grid = make_time_grid(5.0, 32)
    energies = np.array([0.3, -1.1 - 0.05j])
    heff = np.broadcast_to(np.diag(energies), (32, 2, 2)).copy()
    propagator = propagate_effective(heff, grid)
    for k in (0, 7, 31):
        assert_allclose(propagator.samples[k], np.diag(np.exp(-1j * energies * grid.times[k])), atol=1e-12)
    assert_allclose(propagator.final, np.diag(np.exp(-1j * energies * 5.0)), atol=1e-12)
    assert propagator.fallback_steps == 0


@pytest.mark.parametrize("magnus_order", [2, 4])
def test_propagation_reproduces_rabi_rotation(magnus_order):
    g = 0.7
    grid = make_time_grid(5.0, 64)
    heff = np.broadcast_to(np.array([[0.0, g], [g, 0.0]], dtype=complex), (64, 2, 2)).copy()
    propagator = propagate_effective(heff, grid, magnus_order=magnus_order)
    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    for k, t in enumerate(grid.times):
        expected = np.cos(g * t) * np.eye(2) - 1j * np.sin(g * t) * sigma_x
        assert_allclose(propagator.samples[k], expected, atol=1e-10)


def _time_dependent_series(grid):
    a, b, c = (random_hermitian(3, seed=s) / 3.0 for s in (1, 2, 3))
    T = grid.T

    def hamiltonian(t):
        return a + 0.3 * np.cos(2 * np.pi * t / T) * b + 0.2 * np.sin(4 * np.pi * t / T) * c

    return hamiltonian, np.stack([hamiltonian(t) for t in grid.times])


def test_propagation_of_time_dependent_series_matches_fine_integration():
    grid = make_time_grid(5.0, 256)
    hamiltonian, heff = _time_dependent_series(grid)

    def rhs(t, y):
        return (-1j * hamiltonian(t) @ y.reshape(3, 3)).ravel()

    edges = np.append(grid.times, grid.T)
    solution = scipy.integrate.solve_ivp(rhs, (0.0, grid.T), np.eye(3, dtype=complex).ravel(),
                                         method="DOP853", t_eval=edges, rtol=1e-12, atol=1e-12)
    reference = solution.y.T.reshape(-1, 3, 3)

    propagator = propagate_effective(heff, grid, magnus_order=4)
    assert np.max(np.abs(propagator.samples - reference[:-1])) < 1e-8
    assert np.max(np.abs(propagator.final - reference[-1])) < 1e-8

    second_order = propagate_effective(heff, grid, magnus_order=2)
    assert np.max(np.abs(second_order.final - reference[-1])) > np.max(np.abs(propagator.final - reference[-1]))


def test_propagation_rejects_bad_shapes():
    grid = make_time_grid(1.0, 8)
    with pytest.raises(InvalidInputError):
        propagate_effective(np.zeros((4, 2, 2)), grid)
    with pytest.raises(InvalidInputError):
        propagate_effective(np.zeros((8, 2, 2)), grid, magnus_order=6)


def test_energy_shift_keeps_denominators_away_from_zero():
    grid = make_time_grid(120.0, 512)
    spacing = 2 * np.pi / grid.T
    # both energies sit exactly on frequency bins
    energies = np.array([0.0, 3 * spacing], dtype=complex)
    assert np.min(nearest_denominators(energies, 0.0, grid)[0]) < 1e-12
    shift = choose_energy_shift(energies, grid)
    assert np.min(nearest_denominators(energies, shift, grid)[0]) >= 0.49 * spacing


def test_resonant_denominator_names_row_and_bin():
    grid = make_time_grid(10.0, 16)
    with pytest.raises(ResonantDenominatorError) as excinfo:
        check_denominators(np.array([0.0 + 0.0j]), np.array([4]), 0.0, grid, 1.0, 1e-10)
    assert excinfo.value.row == 4
    assert excinfo.value.frequency_bin == 0
    assert excinfo.value.energy_shift == 0.0


def test_zero_residual_gives_zero_increment(toy6):
    model, grid, active = toy6
    zeros = np.zeros((grid.n_time, 6, 2), dtype=complex)
    heff = effective_hamiltonian(zeros, model, grid, active)
    step = increment(zeros, zeros, heff, dressed_diagonal(zeros, model, grid, active), grid, 0.0, model, active)
    assert step.norm() == 0.0
    assert not np.any(step.final)


def test_pulses_off_converges_immediately(toy6):
    model, grid, active = toy6
    report = solve(model.without_pulses(), grid, active, SolveOptions(eps=1e-10))
    assert report.status == STATUS_CONVERGED
    assert report.factors == [0.0]
    assert report.iterations == 1
    assert not np.any(report.wave_operator.blocks)

    psi = propagate_state(report, np.eye(6)[1])
    assert_allclose(psi[:, 1], np.exp(-0.8j * grid.times), atol=1e-10)
    assert_allclose(np.delete(psi, 1, axis=1), 0.0, atol=1e-12)


def test_toy6_converges_with_structural_zeros():
    report = solved_toy6()
    assert report.status == STATUS_CONVERGED
    assert report.factors[-1] <= 1e-10
    assert len(report.factors) == report.iterations
    X = report.wave_operator
    assert not np.any(X.blocks[:, [0, 1], :])
    assert not np.any(X.final[[0, 1], :])
    assert X.norm() > 0


def test_toy6_residual_is_small_at_the_fixed_point(toy6):
    model, grid, active = toy6
    report = solved_toy6()
    start = np.linalg.norm(residual(ReducedWaveOperator.zeros(grid, active), model, grid, active))
    final = np.linalg.norm(residual(report.wave_operator, model, grid, active))
    assert final < 1e-3 * start


def test_toy6_matches_reference_propagation(toy6):
    model, grid, active = toy6
    report = solved_toy6()
    end = physical_end_index(report)
    states = propagate_columns(report)[:end + 1]
    reference = oracle_propagate(model, grid, active, active.embedding(), n_substeps=100)[:end + 1]
    assert np.max(np.abs(states - reference)) <= 1e-6


def test_toy6_result_does_not_depend_on_the_energy_shift(toy6):
    model, grid, active = toy6
    report = solved_toy6()
    shifted = solve(model, grid, active, SolveOptions(eps=1e-10, max_iterations=40, energy_shift=0.1))
    assert shifted.status == STATUS_CONVERGED
    assert shifted.energy_shift == 0.1
    end = physical_end_index(report)
    difference = propagate_columns(report)[:end + 1] - propagate_columns(shifted)[:end + 1]
    assert np.max(np.abs(difference)) <= 1e-6


def test_norm_is_conserved_before_the_absorber():
    report = solved_toy6()
    end = physical_end_index(report)
    norms = np.linalg.norm(propagate_columns(report)[:end + 1], axis=1)
    assert np.max(np.abs(norms - 1.0)) <= 1e-6


def test_divergence_guard_ends_the_solve_with_a_report(toy6):
    model, grid, active = toy6
    report = solve(model, grid, active, SolveOptions(eps=1e-10, divergence_bound=1e-12))
    assert report.status == STATUS_DIVERGED
    assert "exceeds" in report.reason


def test_iteration_budget_ends_in_stall(toy6):
    model, grid, active = toy6
    report = solve(model, grid, active, SolveOptions(eps=1e-30, max_iterations=1))
    assert report.status == STATUS_STALLED
    assert report.iterations == 1


def test_propagate_state_rejects_components_outside_the_active_space():
    report = solved_toy6()
    with pytest.raises(InvalidInputError):
        propagate_state(report, np.eye(6)[3])
    psi = propagate_state(report, np.array([1.0, 0.0]), include_endpoint=True)
    assert psi.shape == (report.grid.n_time + 1, 6)
