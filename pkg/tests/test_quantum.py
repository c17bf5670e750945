import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulseopt.quantum import (Observable, QuantumSystem, as_state, basis_state, expectation,
                              propagate, rb_benchmark_system)
from pulseopt.units import UNITS, TimeGrid

# Final populations of the Rb model driven by the analytic transform-limited
# pulse E0 exp(-tau^2/2tau0^2) cos(w0 tau), tau = t - 100 fs, T = 200 fs, from
# an adaptive 8th-order ODE solve (rtol 1e-12) written without this package.
TL_POPULATIONS_ORACLE = np.array([0.7366474908774733, 0.25189251789105327, 0.011459991231405236])


def test_benchmark_system_constants():
    s = rb_benchmark_system()
    assert s.energies[0] == 0.0
    assert s.energies[1] == pytest.approx(UNITS.wavenumber_to_angular_frequency(12578.95))
    assert s.energies[2] == pytest.approx(UNITS.wavenumber_to_angular_frequency(12816.55))
    assert s.dipole[1, 2] == 0.0 and s.dipole[2, 1] == 0.0
    assert s.dipole[0, 1] == pytest.approx(2.9931)
    assert s.dipole[0, 2] == pytest.approx(4.2275)
    np.testing.assert_array_equal(np.diag(s.dipole), 0.0)


def test_system_validation():
    with pytest.raises(ValueError):
        QuantumSystem([0.0, 1.0], [[0.0, 1.0], [0.5, 0.0]])
    with pytest.raises(ValueError):
        QuantumSystem([1.0, 0.0], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        QuantumSystem([0.0, 1.0], np.zeros((3, 3)))


def test_zero_field_free_evolution():
    s = rb_benchmark_system()
    g = TimeGrid(0.0, 137.0, 501)
    r = propagate(s, np.zeros(g.n_points), g)
    np.testing.assert_allclose(r.final_unitary, np.diag(np.exp(-1j * s.energies * 137.0)), atol=1e-12)
    np.testing.assert_allclose(r.populations, np.tile([1.0, 0.0, 0.0], (g.n_points, 1)), atol=1e-14)


def test_initial_step_is_identity(rb2):
    r = rb2.propagate()
    np.testing.assert_allclose(r.unitary_trajectory[0], np.eye(3), atol=1e-15)


def test_transform_limited_populations_match_ode_oracle():
    from pulseopt.objectives import rb_transfer_problem
    r = rb_transfer_problem(2, 200.0).propagate()
    np.testing.assert_allclose(r.populations[-1], TL_POPULATIONS_ORACLE, atol=1e-6)
    assert np.all(r.populations[-1] > 0.01)


def test_transfer_is_oscillatory_during_pulse(rb2):
    p2 = rb2.propagate().populations[:, 1]
    d = np.diff(p2)
    assert np.count_nonzero((d[:-1] > 0) & (d[1:] < 0)) >= 3


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 0.5))
def test_unitarity_and_population_sum(seed, strength):
    rng = np.random.default_rng(seed)
    s = rb_benchmark_system()
    g = TimeGrid(0.0, 100.0, 1024)
    r = propagate(s, strength * rng.normal(size=g.n_points), g)
    assert r.unitarity_error() < 1e-8
    assert np.max(np.abs(r.populations.sum(axis=1) - 1)) < 1e-8
    assert r.populations.min() >= 0 and r.populations.max() <= 1 + 1e-10


def test_step_halving_changes_populations_below_1e6():
    from pulseopt.objectives import rb_transfer_problem
    p = rb_transfer_problem(3, 200.0)
    coarse = p.propagate().populations[-1]
    fine_grid = p.time_grid.refined(2)
    from pulseopt.pulse import synthesize
    e = synthesize(p.base_field, fine_grid, p.t_center)
    fine = propagate(p.system, e, fine_grid).populations[-1]
    assert np.max(np.abs(fine - coarse)) < 1e-6


def test_field_length_mismatch_rejected():
    g = TimeGrid(0.0, 1.0, 10)
    with pytest.raises(ValueError, match="samples"):
        propagate(rb_benchmark_system(), np.zeros(9), g)


def test_forbidden_transition_routes_through_ground_state():
    # From |2>, |3> can only be reached via |1>: second order in the field,
    # so its population scales as E^4 while |1> scales as E^2.
    s = rb_benchmark_system()
    g = TimeGrid(0.0, 200.0, 4096)
    t = g.points
    w0 = UNITS.wavenumber_to_angular_frequency(12698.0)
    shape = np.exp(-((t - 100.0) / 30.0) ** 2 / 2) * np.cos(w0 * (t - 100.0))
    psi0 = basis_state(3, 1)
    p = [propagate(s, a * shape, g, psi0).populations[-1] for a in (1e-4, 2e-4)]
    assert p[1][0] / p[0][0] == pytest.approx(4.0, rel=1e-3)
    assert p[1][2] / p[0][2] == pytest.approx(16.0, rel=1e-2)
    # removing the |1>-|3> coupling leaves |3> unreachable
    s0 = QuantumSystem(s.energies, np.array([[0, 2.9931, 0], [2.9931, 0, 0], [0, 0, 0]]))
    assert propagate(s0, 0.05 * shape, g, psi0).populations[-1][2] < 1e-28


def test_expectation_identities(rb2):
    r = rb2.propagate()
    psi0 = basis_state(3, 0)
    assert expectation(r, psi0, Observable(np.eye(3))) == pytest.approx(1.0, abs=1e-10)
    for j in range(3):
        assert expectation(r, psi0, Observable.projector(3, j)) == pytest.approx(r.populations[-1, j], abs=1e-14)
    g = TimeGrid(0.0, 50.0, 100)
    r0 = propagate(rb_benchmark_system(), np.zeros(100), g)
    assert expectation(r0, psi0, Observable.projector(3, 0)) == pytest.approx(1.0, abs=1e-12)


def test_non_hermitian_observable_rejected():
    with pytest.raises(ValueError, match="Hermitian"):
        Observable(np.array([[0, 1], [0, 0]]))


def test_state_normalization_checked():
    with pytest.raises(ValueError):
        as_state([1.0, 1.0])
    with pytest.raises(ValueError):
        as_state([1.0, 0.0], dim=3)
