import math

import numpy as np
import pytest
from sklearn.base import clone

from pulseopt.gradient_flow import (ConstraintSet, EndpointConstraint, FilterFunction,
                                    GradientFlowOptimizer, GradientFlowOptions, gamma_matrix,
                                    constrained_update_direction, run_gradient_flow, solve_gamma)
from pulseopt.units import UNITS


def test_filter_kernel_properties():
    f = FilterFunction.from_wavenumber(50.0)
    assert f.sigma == pytest.approx(UNITS.wavenumber_to_angular_frequency(50.0))
    d = np.linspace(-0.1, 0.1, 201)
    k = f.kernel(d)
    assert f.kernel(0.0) == 1.0
    np.testing.assert_array_equal(k, f.kernel(-d))
    assert np.all(k >= 0)
    assert f.kernel(f.sigma / 2) == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("sigma", [0.0, -1.0, math.inf, math.nan])
def test_filter_rejects_bad_width(sigma):
    with pytest.raises(ValueError):
        FilterFunction(sigma)


def _weighted(a, b, w):
    # independent quadrature: numpy trapezoid on the grid nodes
    trap = getattr(np, "trapezoid", None) or np.trapz
    return trap(a * b, dx=w[1])


def test_gamma_symmetric_psd(rb2, rng):
    fld = rb2.field(0.3 * rng.normal(size=rb2.base_field.grid.n_points))
    ev = rb2.evaluate(fld.phase)
    C = np.vstack([ev.gradient, rb2.constraints().coefficients(fld)])
    S = FilterFunction.from_wavenumber(50.0).matrix(fld.grid)
    G = gamma_matrix(C, S, fld.grid.weights)
    assert G.shape == (3, 3)
    assert np.max(np.abs(G - G.T)) <= 1e-10 * np.max(np.abs(G))
    assert np.linalg.eigvalsh(G).min() >= -1e-10 * np.abs(G).max()


def test_unconstrained_direction_is_filtered_gradient(rb2, rng):
    fld = rb2.base_field
    c0 = rng.normal(size=fld.grid.n_points)
    filt = FilterFunction.from_wavenumber(200.0)
    d = constrained_update_direction(c0, ConstraintSet(), filt, fld)
    w = fld.grid.weights
    S = filt.kernel(fld.omega[:, None] - fld.omega[None, :])
    sw = S @ (w * c0)
    np.testing.assert_allclose(d, sw / np.sum(w * c0 * sw), rtol=1e-10)


def test_gradient_orthogonal_to_constraints_is_unchanged(rb2, rng):
    fld = rb2.field(rng.normal(size=rb2.base_field.grid.n_points))
    cons = rb2.constraints()
    filt = FilterFunction.from_wavenumber(200.0)
    S = filt.matrix(fld.grid)
    w = fld.grid.weights
    Ck = cons.coefficients(fld)
    r = rng.normal(size=fld.grid.n_points)
    # remove the S-weighted projection onto span{c_1, c_2}
    M = (Ck * w) @ S @ (Ck * w).T
    coef = np.linalg.solve(M, (Ck * w) @ S @ (w * r))
    c0 = r - coef @ Ck
    d = constrained_update_direction(c0, cons, filt, fld)
    d0 = constrained_update_direction(c0, ConstraintSet(), filt, fld)
    np.testing.assert_allclose(d, d0, rtol=1e-8, atol=1e-10 * np.abs(d0).max())


def test_first_iteration_direction_preserves_constraints(rb2):
    fld = rb2.base_field
    ev = rb2.evaluate()
    d, info = constrained_update_direction(ev.gradient, rb2.constraints(), FilterFunction.from_wavenumber(5000.0),
                                           fld, return_info=True)
    w = fld.grid.weights
    for t in (0.0, 200.0):
        ck = -fld.amplitude * np.sin(fld.phase - fld.omega * (t - 100.0))
        rel = abs(_weighted(ck, d, w)) / math.sqrt(_weighted(ck, ck, w) * _weighted(d, d, w))
        assert rel < 1e-8
    assert _weighted(ev.gradient, d, w) > 0
    assert info.ascent == pytest.approx(1.0, rel=1e-8)


def test_narrow_filter_limit_returns_weighted_gradient(rb2, rng):
    # sigma -> 0 makes S the identity matrix, so d is proportional to w c0
    fld = rb2.base_field
    c0 = rng.normal(size=fld.grid.n_points)
    d = constrained_update_direction(c0, ConstraintSet(), FilterFunction(1e-9), fld)
    ref = fld.grid.weights * c0
    k = np.dot(d, ref) / np.dot(ref, ref)
    assert np.max(np.abs(d - k * ref)) < 1e-6 * np.max(np.abs(k * ref))


def test_wide_filter_limit_is_constant(rb2, rng):
    # sigma -> infinity makes S all ones, so every frequency gets the same update
    fld = rb2.base_field
    c0 = rng.normal(size=fld.grid.n_points) + 0.5
    d = constrained_update_direction(c0, ConstraintSet(), FilterFunction(1e9), fld)
    assert np.ptp(d) < 1e-6 * np.max(np.abs(d))


def test_degenerate_gamma_is_regularized(rb2, rng):
    fld = rb2.base_field
    c0 = rng.normal(size=fld.grid.n_points)

    class Null:
        target = 0.0

        def value(self, field):
            return 0.0

        def coefficient(self, field):
            return np.zeros(field.grid.n_points)

    d, info = constrained_update_direction(c0, ConstraintSet((Null(),)), FilterFunction(0.01), fld,
                                           return_info=True)
    assert info.regularized
    assert np.all(np.isfinite(d))
    assert info.ascent == pytest.approx(1.0, rel=1e-10)


def test_solve_gamma_regular_system():
    G = np.array([[4.0, 1.0], [1.0, 3.0]])
    x, reg = solve_gamma(G, np.array([1.0, 0.0]))
    np.testing.assert_allclose(G @ x, [1.0, 0.0], atol=1e-14)
    assert not reg


class _ToyProblem:
    """Quadratic objective over a tiny frequency grid, no constraints."""

    def __init__(self, value_offset=0.0, nan=False):
        from pulseopt.pulse import SpectralField
        from pulseopt.units import FrequencyGrid
        self.base_field = SpectralField(FrequencyGrid(1.0, 2.0, 16), np.ones(16))
        self.target_value = 1.0
        self.offset = value_offset
        self.nan = nan

    def constraints(self):
        return ConstraintSet()

    def evaluate(self, phase, gradient=True):
        class E:
            pass
        e = E()
        e.value = math.nan if self.nan else 1.0 - self.offset - 1e-3 * float(np.sum((phase - 0.3) ** 2))
        e.gradient = -2e-3 * (phase - 0.3) / self.base_field.grid.weights if gradient else None
        e.field_samples = np.ones(4)
        return e


def test_converged_start_stops_immediately():
    class AtOptimum(_ToyProblem):
        def evaluate(self, phase, gradient=True):
            return super().evaluate(np.full_like(phase, 0.3), gradient)

    st = run_gradient_flow(AtOptimum(1e-12), options=GradientFlowOptions(max_iter=50))
    assert st.iteration <= 1
    assert st.reason == "objective"


def test_non_finite_objective_aborts():
    with pytest.raises(FloatingPointError):
        run_gradient_flow(_ToyProblem(nan=True))


def test_toy_problem_monotone_to_optimum():
    st = run_gradient_flow(_ToyProblem(0.5), None, FilterFunction(1e-3),
                           GradientFlowOptions(max_iter=500, tol=1e-12))
    J = st.objectives()
    assert np.all(np.diff(J) >= 0)
    assert J[-1] == pytest.approx(0.5, abs=1e-9)


def test_short_rb_run_invariants(rb3):
    opt = GradientFlowOptimizer(sigma=50.0, max_iter=15).fit(rb3)
    J = np.array([h.objective for h in opt.history_])
    assert len(J) == opt.n_iter_ + 1 == 16
    assert np.all(np.diff(J) >= 0)
    assert J[-1] > J[0]
    assert max(h.edge_ratio for h in opt.history_) < 1e-3
    assert max(max(h.orthogonality) for h in opt.history_[1:]) < 1e-8
    assert min(h.ascent for h in opt.history_[1:]) > 0
    assert opt.score(rb3) == pytest.approx(opt.objective_, abs=1e-14)


def test_restored_start_is_feasible(rb3):
    # the transform-limited pulse leaks 3.5e-3 of its peak to the window edges
    ev = rb3.evaluate(gradient=False)
    peak = np.max(np.abs(ev.field_samples))
    assert np.max(np.abs(rb3.constraints().residuals(rb3.base_field))) / peak > 1e-3
    opt = GradientFlowOptimizer(sigma=50.0, max_iter=0).fit(rb3)
    assert opt.history_[0].edge_ratio <= 1e-6


def test_estimator_params_round_trip():
    est = GradientFlowOptimizer(sigma=50.0, max_iter=7)
    c = clone(est)
    assert c.get_params()["sigma"] == 50.0 and c.get_params()["max_iter"] == 7


def test_endpoint_constraint_value(rb2):
    c = EndpointConstraint(0.0, 100.0)
    e = rb2.temporal_field()
    assert c.value(rb2.base_field) == pytest.approx(e[0], rel=1e-9)
