import numpy as np
import pytest
import scipy.integrate
import scipy.linalg
from numpy.testing import assert_allclose

from src.models import (CoordinateGrid, HamiltonianModel, PotentialCurve, PulseSpec, RadialCAP,
                        TimeAbsorber, ZerothOrderBasis, assemble_hamiltonian, bound_state_indices,
                        build_basis, build_grid_hamiltonian, build_model, couple_surfaces,
                        diagonalize_h0, eval_field, hamiltonian_at, kinetic_matrix, levels_basis,
                        load_tabulated_curve, resolve_active)
from src.models.potentials import curve_from_spec
from src.utils.errors import GridError, InvalidInputError
from src.tests.test_utils import random_complex_symmetric, random_hermitian, toy6_config


def test_coordinate_grid_points():
    grid = CoordinateGrid(-2.0, 2.0, 16)
    assert grid.spacing == 0.25
    assert_allclose(grid.points[[0, -1]], [-2.0, 1.75])
    with pytest.raises(GridError):
        CoordinateGrid(-2.0, 2.0, 8)
    with pytest.raises(GridError):
        CoordinateGrid(2.0, -2.0, 32)


def test_kinetic_matrix_is_real_symmetric():
    kinetic = kinetic_matrix(CoordinateGrid(0.0, 10.0, 32), mass=2.0)
    assert kinetic.dtype == float
    assert_allclose(kinetic, kinetic.T)
    assert np.all(np.linalg.eigvalsh(kinetic) > -1e-12)


def test_harmonic_oscillator_levels():
    grid = CoordinateGrid(-10.0, 10.0, 128)
    curve = PotentialCurve(kind="quartic", mass=1.0, coefficients=(0.0, 0.0, 0.5))
    basis = diagonalize_h0(build_grid_hamiltonian(curve, grid), "hermitian")
    assert_allclose(basis.energies[:8].real, np.arange(8) + 0.5, rtol=0, atol=1e-8)
    assert_allclose(basis.energies.imag, 0.0)


def test_quartic_curve_evaluates_polynomial():
    curve = PotentialCurve(kind="quartic", mass=10.0, coefficients=(0.0, 0.0, -5.0, 0.5, 1.0))
    x = np.array([-1.0, 0.0, 2.0])
    assert_allclose(curve.evaluate(x), -5 * x ** 2 + 0.5 * x ** 3 + x ** 4)


def test_surrogate_curves():
    morse = PotentialCurve(kind="analytic-surrogate", mass=918.076, form="morse",
                           parameters={"D": 0.1026, "a": 0.72, "r_e": 2.0})
    assert_allclose(morse.evaluate(2.0), -0.1026)
    assert abs(morse.evaluate(60.0)) < 1e-12
    repulsive = PotentialCurve(kind="analytic-surrogate", mass=918.076, form="repulsive",
                               parameters={"A": 0.3325, "b": 0.866, "r_e": 2.0})
    assert_allclose(repulsive.evaluate(2.0), 0.3325)
    assert np.all(np.diff(repulsive.evaluate(np.linspace(1, 10, 20))) < 0)


def test_curve_validation():
    with pytest.raises(InvalidInputError):
        PotentialCurve(kind="quartic", mass=-1.0, coefficients=(1.0,))
    with pytest.raises(InvalidInputError):
        PotentialCurve(kind="analytic-surrogate", mass=1.0, form="morse", parameters={"D": 1.0})
    with pytest.raises(InvalidInputError):
        curve_from_spec({"kind": "spline", "mass": 1.0})


def test_tabulated_curve_interpolates_inside_its_range():
    x = np.linspace(-2.0, 2.0, 41)
    curve = PotentialCurve(kind="tabulated", mass=1.0, table=np.column_stack([x, x ** 2]))
    points = np.array([-1.93, -0.51, 0.0, 1.234])
    assert_allclose(curve.evaluate(points), points ** 2, atol=1e-12)
    with pytest.raises(GridError):
        curve.evaluate(np.array([0.0, 2.5]))
    with pytest.raises(GridError):
        build_grid_hamiltonian(curve, CoordinateGrid(-3.0, 3.0, 32))


def test_load_tabulated_curve(tmp_path):
    path = tmp_path / "curve.dat"
    x = np.linspace(0.0, 5.0, 11)
    path.write_text("# r  V\n" + "\n".join(f"{a} {b}" for a, b in zip(x, 2 * x)) + "\n")
    curve = load_tabulated_curve(str(path), mass=3.0)
    assert curve.table.shape == (11, 2)
    assert_allclose(curve.evaluate(2.25), 4.5)

    spec_curve = curve_from_spec({"kind": "tabulated", "mass": 3.0, "file": "curve.dat"}, base_dir=str(tmp_path))
    assert_allclose(spec_curve.table, curve.table)
    with pytest.raises(InvalidInputError):
        load_tabulated_curve(str(tmp_path / "missing.dat"), mass=1.0)


def test_hermitian_diagonalization_is_orthonormal():
    matrix = random_hermitian(6)
    basis = diagonalize_h0(matrix, "hermitian")
    vectors = basis.vectors
    assert_allclose(vectors.conj().T @ vectors, np.eye(6), atol=1e-12)
    assert np.all(np.diff(basis.energies.real) >= 0)


def test_complex_symmetric_diagonalization_is_c_normalized():
    matrix = random_complex_symmetric(6)
    basis = diagonalize_h0(matrix, "complex-symmetric")
    vectors, energies = basis.vectors, basis.energies
    assert_allclose(vectors.T @ vectors, np.eye(6), atol=1e-9)
    assert_allclose(matrix @ vectors, vectors * energies[np.newaxis, :], atol=1e-9)
    expected = scipy.linalg.eigvals(matrix)
    assert_allclose(energies, expected[np.argsort(expected.real)], atol=1e-10)


def test_diagonalization_rejects_mode_mismatch():
    with pytest.raises(InvalidInputError):
        diagonalize_h0(random_complex_symmetric(4), "hermitian")
    with pytest.raises(InvalidInputError):
        diagonalize_h0(random_hermitian(4), "complex-symmetric")
    with pytest.raises(InvalidInputError):
        diagonalize_h0(np.zeros((3, 4)), "hermitian")


def test_cap_pushes_energies_into_lower_half_plane():
    grid = CoordinateGrid(0.8, 40.8, 128)
    curve = PotentialCurve(kind="analytic-surrogate", mass=918.076, form="morse",
                           parameters={"D": 0.1026, "a": 0.72, "r_e": 2.0})
    cap = RadialCAP(onset=25.0, strength=0.01, exponent=3.0)
    basis = diagonalize_h0(build_grid_hamiltonian(curve, grid, cap=cap), "complex-symmetric")
    assert np.all(basis.energies.imag <= 1e-10)
    assert basis.energies[-1].imag < 0
    # the deepest vibrational levels sit far from the CAP
    assert np.all(np.abs(basis.energies[:5].imag) < 1e-6)


def test_radial_cap_profile():
    cap = RadialCAP(onset=2.0, strength=0.5, exponent=2.0)
    assert_allclose(cap.value(np.array([0.0, 2.0, 3.0, 4.0]), end=4.0), [0.0, 0.0, 0.125, 0.5])
    with pytest.raises(InvalidInputError):
        RadialCAP(onset=2.0, strength=-1.0)


def _two_surface_spec(**extra):
    spec = {
        "kind": "two-surface",
        "mode": "hermitian",
        "grid": {"x_min": -4.5, "x_max": 4.5, "n_points": 64},
        "lower": {"kind": "quartic", "mass": 10.0, "coefficients": [0.0, 0.0, -5.0, 0.5, 1.0]},
        "upper": {"kind": "quartic", "mass": 10.0, "coefficients": [0.0, 0.0, 0.0, 0.0, 0.2]},
        "dipole": {"kind": "constant", "value": 1.0},
        "n_states": 6,
    }
    spec.update(extra)
    return spec


def test_two_surface_basis_couples_only_across_surfaces():
    basis = build_basis(_two_surface_spec())
    assert basis.size == 12
    assert basis.labels[:2] == ((0, 0), (0, 1))
    assert basis.labels[6] == (1, 0)
    assert basis.index_of(1, 3) == 9
    assert_allclose(basis.dipole[:6, :6], 0.0)
    assert_allclose(basis.dipole[6:, 6:], 0.0)
    assert_allclose(basis.dipole, basis.dipole.conj().T, atol=1e-12)
    assert np.max(np.abs(basis.dipole[:6, 6:])) > 0.1


def test_energy_cutoff_drops_upper_states():
    full = build_basis(_two_surface_spec())
    cutoff = float(full.energies[8].real) + 1e-9
    trimmed = build_basis(_two_surface_spec(energy_cutoff=cutoff))
    assert trimmed.size == 9
    assert len(trimmed.surface_indices(1)) == 3
    assert np.all(trimmed.energies[6:].real <= cutoff)


def test_couple_surfaces_with_linear_dipole():
    grid = CoordinateGrid(-3.0, 3.0, 32)
    lower = diagonalize_h0(kinetic_matrix(grid, 1.0) + np.diag(grid.points ** 2), "hermitian")
    upper = diagonalize_h0(kinetic_matrix(grid, 1.0) + np.diag(0.5 * grid.points ** 2 + 3.0), "hermitian")
    basis = couple_surfaces(lower, upper, grid.points, lambda r: r)
    block = lower.vectors.conj().T @ (grid.points[:, np.newaxis] * upper.vectors)
    assert_allclose(basis.dipole[:32, 32:], block, atol=1e-12)


def test_levels_basis_requires_hermitian_dipole():
    with pytest.raises(InvalidInputError):
        levels_basis([0.0, 1.0], [[0.0, 1.0], [2.0, 0.0]], mode="hermitian")
    basis = levels_basis([0.0, 1.0], [[0.0, 1.0], [2.0, 0.0]], mode="complex-symmetric")
    assert basis.size == 2


def _selector_basis():
    energies = [-0.5, -0.2, -0.01 - 0.01j, 0.1, 0.3, 0.2, 0.5, 0.9]
    labels = [(0, v) for v in range(5)] + [(1, v) for v in range(3)]
    return ZerothOrderBasis(energies=np.array(energies), vectors=np.eye(8), mode="complex-symmetric",
                            dipole=np.zeros((8, 8)), labels=tuple(labels))


def test_resolve_active_selectors():
    basis = _selector_basis()
    assert bound_state_indices(basis, 0) == [0, 1]
    assert resolve_active([{"surface": 0, "bound": True}], basis) == [0, 1]
    assert resolve_active([{"surface": 0, "first": 2, "skip": "bound"}], basis) == [2, 3]
    assert resolve_active([{"surface": 0, "first": 2, "skip": 1}], basis) == [1, 2]
    assert resolve_active([{"surface": 1, "last": 2}], basis) == [6, 7]
    assert resolve_active([{"surface": 1, "levels": [0]}, 4], basis) == [5, 4]
    assert resolve_active([{"surface": 0, "bound": True, "threshold": 0.1}], basis) == [0, 1, 2]


def test_resolve_active_rejects_bad_selectors():
    basis = _selector_basis()
    with pytest.raises(InvalidInputError):
        resolve_active([{"surface": 1, "first": 10}], basis)
    with pytest.raises(InvalidInputError):
        resolve_active([{"surface": 0}], basis)
    with pytest.raises(InvalidInputError):
        resolve_active([{"surface": 2, "levels": [0]}], basis)
    with pytest.raises(InvalidInputError):
        resolve_active(["zero"], basis)


def test_build_model_from_toy6_preset():
    config = toy6_config()
    model = build_model(config.model, config.pulses, config.absorber, config.T, config.T0)
    assert model.size == 6
    assert len(model.pulses) == 2
    assert model.absorber.T0 == 100.0 and model.absorber.T == 120.0
    assert model.dipole[0, 1] == 1.0
    assert_allclose(model.dipole, model.dipole.conj().T)
    assert not model.dissipative
    assert model.T0 == 100.0
    assert model.without_absorber().absorber is None
    assert model.without_absorber().T0 == 100.0
    assert model.without_pulses().pulses == ()


def test_preset_absorbers_clear_the_complement_before_T():
    # X(T) inherits this factor, so it bounds the cyclicity defect
    config = toy6_config()
    model = build_model(config.model, config.pulses, config.absorber, config.T, config.T0)
    assert model.absorber.attenuation(model.hbar) < 1e-12
    default = TimeAbsorber(T0=100.0, T=120.0)
    assert default.attenuation() < 1e-12
    assert TimeAbsorber(T0=100.0, T=120.0, strength=0.5).attenuation() > 1e-2


def test_model_without_absorber_keeps_the_configured_T0():
    config = toy6_config({"absorber": {"enabled": False}})
    model = build_model(config.model, config.pulses, config.absorber, config.T, config.T0)
    assert model.absorber is None
    assert model.T0 == 100.0


def test_pulses_sum_into_the_field():
    first = PulseSpec(amplitude=0.03, frequency=0.8, center=40.0, width=10.0)
    second = PulseSpec(amplitude=0.02, frequency=0.9, center=50.0, width=10.0)
    t = np.array([0.0, 40.0, 50.0])
    assert_allclose(first.evaluate(40.0), 0.03)
    assert_allclose(eval_field([first, second], t), first.evaluate(t) + second.evaluate(t))
    assert_allclose(eval_field([], t), 0.0)
    with pytest.raises(InvalidInputError):
        PulseSpec(amplitude=1.0, frequency=1.0, center=0.0, width=0.0)


def test_time_absorber_closed_form_integral():
    absorber = TimeAbsorber(T0=100.0, T=120.0, exponent=2.0, strength=0.5)
    assert absorber.value(100.0) == 0.0
    assert_allclose(absorber.value(120.0), 0.5)
    for t in (50.0, 105.0, 113.7, 120.0):
        expected, _ = scipy.integrate.quad(lambda s: float(absorber.value(s)), 0.0, t,
                                           points=[100.0], epsabs=1e-13, epsrel=1e-13)
        assert_allclose(absorber.integral(t), expected, rtol=1e-10, atol=1e-13)
    with pytest.raises(InvalidInputError):
        TimeAbsorber(T0=120.0, T=120.0)


def _random_model():
    rng = np.random.default_rng(5)
    dipole = random_hermitian(5, seed=21)
    basis = levels_basis(np.sort(rng.uniform(0, 2, size=5)), dipole, mode="hermitian")
    pulses = (PulseSpec(0.1, 1.1, 30.0, 8.0), PulseSpec(0.05, 0.7, 60.0, 12.0))
    return HamiltonianModel(basis=basis, pulses=pulses, absorber=TimeAbsorber(T0=100.0, T=120.0, strength=5.0))


def test_apply_matches_dense_hamiltonian():
    model = _random_model()
    active = [0, 2]
    times = np.array([0.0, 33.0, 104.0, 119.5])
    rng = np.random.default_rng(9)
    blocks = rng.normal(size=(4, 5, 3)) + 1j * rng.normal(size=(4, 5, 3))
    applied = model.apply(blocks, times, active)
    for j, t in enumerate(times):
        dense = assemble_hamiltonian(model.basis, model.pulses, model.absorber, active, t)
        assert_allclose(applied[j], dense @ blocks[j], atol=1e-12)
        assert_allclose(hamiltonian_at(model, active, t), dense)


def test_columns_match_dense_hamiltonian():
    model = _random_model()
    active = [1, 3]
    times = np.array([10.0, 110.0])
    columns = model.columns(times, active)
    for j, t in enumerate(times):
        dense = assemble_hamiltonian(model.basis, model.pulses, model.absorber, active, t)
        assert_allclose(columns[j], dense[:, active], atol=1e-12)


def test_absorber_acts_on_the_complement_only():
    model = _random_model()
    dense = assemble_hamiltonian(model.basis, (), model.absorber, [0, 2], 120.0)
    damping = -np.diag(dense).imag
    assert_allclose(damping, [0.0, 5.0, 0.0, 5.0, 5.0])
