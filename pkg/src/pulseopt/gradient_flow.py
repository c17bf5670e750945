"""Constrained gradient flow over the spectral phase.

The phase follows ``dphi/ds = d(w)`` with

    d = S W C x,   Gamma x = e_0,   Gamma = C^T W S W C,

where ``C = [c_0, c_1, ..., c_K]`` stacks the objective gradient density
``c_0`` and the constraint coefficient densities ``c_k``, ``W`` holds the
frequency quadrature weights and ``S`` is the Gaussian smoothing kernel
``exp(-4 ln2 (w - w')^2 / sigma^2)``. Then ``<c_0, d> = 1`` and
``<c_k, d> = 0`` (weighted inner products), so the objective increases at
first order while the constraints are preserved.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .pulse import SpectralField, endpoint_coefficient, field_endpoint
from .units import UNITS, FrequencyGrid

__all__ = [
    "FilterFunction",
    "EndpointConstraint",
    "ConstraintSet",
    "gamma_matrix",
    "solve_gamma",
    "constrained_update_direction",
    "DirectionInfo",
    "HistoryRecord",
    "GradientFlowOptions",
    "GradientFlowState",
    "restore_feasibility",
    "run_gradient_flow",
    "GradientFlowOptimizer",
]

logger = logging.getLogger(__name__)

_FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class FilterFunction:
    """Gaussian smoothing kernel ``S(delta) = exp(-4 ln2 delta^2 / sigma^2)``.

    Parameters
    ----------
    sigma : float
        Full width at half maximum in rad/fs. Small values leave the
        gradient nearly untouched; large values only pass slowly varying
        phase updates.
    """

    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"filter width must be positive and finite, got {self.sigma}")

    @classmethod
    def from_wavenumber(cls, sigma_cm: float, units=UNITS) -> "FilterFunction":
        return cls(float(units.wavenumber_to_angular_frequency(sigma_cm)))

    def kernel(self, delta):
        delta = np.asarray(delta, dtype=float)
        return np.exp(-_FOUR_LN2 * delta ** 2 / self.sigma ** 2)

    def matrix(self, grid: FrequencyGrid) -> np.ndarray:
        w = grid.points
        return self.kernel(w[:, None] - w[None, :])


@dataclass(frozen=True)
class EndpointConstraint:
    """Equality constraint ``E(time) = target`` on the synthesized field."""

    time: float
    t_center: float
    target: float = 0.0

    def value(self, field: SpectralField) -> float:
        return field_endpoint(field, self.time, self.t_center)

    def coefficient(self, field: SpectralField) -> np.ndarray:
        return endpoint_coefficient(field, self.time, self.t_center)

    def restoration_basis(self, field: SpectralField) -> list[np.ndarray]:
        """Phase patterns that move this constraint most directly."""
        arg = field.omega * (self.time - self.t_center)
        return [np.cos(arg), np.sin(arg)]


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered collection of equality constraints (possibly empty)."""

    constraints: tuple = ()

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def values(self, field: SpectralField) -> np.ndarray:
        return np.array([c.value(field) for c in self.constraints], dtype=float)

    def targets(self) -> np.ndarray:
        return np.array([c.target for c in self.constraints], dtype=float)

    def residuals(self, field: SpectralField) -> np.ndarray:
        return self.values(field) - self.targets()

    def coefficients(self, field: SpectralField) -> np.ndarray:
        if not self.constraints:
            return np.zeros((0, field.grid.n_points))
        out = np.array([c.coefficient(field) for c in self.constraints], dtype=float)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite constraint coefficient")
        return out


def gamma_matrix(coeffs, filter_matrix, weights) -> np.ndarray:
    """``Gamma_kl = sum_jj' w_j c_k(j) S(j, j') w_j' c_l(j')``.

    Parameters
    ----------
    coeffs : array_like, shape (K+1, n)
        Rows ``c_0 ... c_K``.
    filter_matrix : array_like, shape (n, n)
    weights : array_like, shape (n,)

    Returns
    -------
    ndarray, shape (K+1, K+1)
        Symmetric positive semidefinite matrix.
    """
    C = np.atleast_2d(np.asarray(coeffs, dtype=float))
    WC = C * np.asarray(weights)[None, :]
    G = WC @ np.asarray(filter_matrix) @ WC.T
    return 0.5 * (G + G.T)


def solve_gamma(G, rhs, rcond: float = 1e-12):
    """Solve ``G x = rhs`` for a symmetric PSD ``G``.

    The system is first scaled by its diagonal; eigen-directions with
    eigenvalue below ``rcond`` times the largest are dropped (minimum-norm
    pseudo-inverse). Returns ``(x, regularized)``.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(rhs, dtype=float)
    diag = np.diag(G).copy()
    scale = np.where(diag > 0, np.sqrt(np.abs(diag)), 1.0)
    Gs = G / np.outer(scale, scale)
    lam, V = np.linalg.eigh(Gs)
    top = lam[-1] if lam.size else 0.0
    if top <= 0:
        return np.zeros_like(b), True
    keep = lam > rcond * top
    inv = np.where(keep, 1.0 / np.where(keep, lam, 1.0), 0.0)
    xs = V @ (inv * (V.T @ (b / scale)))
    regularized = bool(not np.all(keep) or np.any(diag <= 0))
    return xs / scale, regularized


@dataclass(frozen=True)
class DirectionInfo:
    """Diagnostics of one constrained direction.

    Attributes
    ----------
    ascent : float
        ``<c_0, d>`` (weighted); 1 unless ``c_0`` lies in the span of the
        filtered constraint gradients.
    orthogonality : tuple of float
        ``|<c_k, d>| / (||c_k|| ||d||)`` for ``k = 1..K``.
    regularized : bool
        A degenerate Gamma was pseudo-inverted.
    gamma : ndarray
    """

    ascent: float
    orthogonality: tuple
    regularized: bool
    gamma: np.ndarray = field(repr=False)


def _weighted_dot(a, b, w):
    return float(np.sum(w * a * b))


def constrained_update_direction(grad, constraints: ConstraintSet, filter: FilterFunction,
                                 field: SpectralField, *, rates=None,
                                 filter_matrix=None, rcond: float = 1e-12,
                                 return_info: bool = False):
    """Filtered ascent direction that preserves the constraints to first order.

    Parameters
    ----------
    grad : array_like
        Objective gradient density ``c_0`` over frequency.
    constraints : ConstraintSet
    filter : FilterFunction
    field : SpectralField
        Current field (the constraint coefficients depend on it).
    rates : array_like, optional
        Requested ``[dJ/ds, df_1/ds, ..., df_K/ds]``; defaults to
        ``[1, 0, ..., 0]``.
    filter_matrix : ndarray, optional
        Precomputed ``filter.matrix(field.grid)``.
    return_info : bool
        Also return a :class:`DirectionInfo`.

    Returns
    -------
    ndarray or (ndarray, DirectionInfo)
    """
    c0 = np.asarray(grad, dtype=float)
    n = field.grid.n_points
    if c0.shape != (n,):
        raise ValueError(f"gradient has shape {c0.shape}, grid has {n} points")
    if not np.all(np.isfinite(c0)):
        raise FloatingPointError("non-finite objective gradient")
    C = np.vstack([c0[None, :], constraints.coefficients(field)])
    w = field.grid.weights
    S = filter.matrix(field.grid) if filter_matrix is None else filter_matrix
    F = S @ (C * w[None, :]).T             # columns: S W c_k
    G = C @ (w[:, None] * F)
    G = 0.5 * (G + G.T)
    b = np.zeros(C.shape[0])
    b[0] = 1.0
    if rates is not None:
        b = np.asarray(rates, dtype=float)
        if b.shape != (C.shape[0],):
            raise ValueError("rates must have K+1 entries")
    x, regularized = solve_gamma(G, b, rcond)
    d = F @ x
    if not return_info:
        return d
    dn = math.sqrt(max(_weighted_dot(d, d, w), 0.0))
    orth = []
    for ck in C[1:]:
        cn = math.sqrt(max(_weighted_dot(ck, ck, w), 0.0))
        orth.append(0.0 if cn == 0 or dn == 0 else abs(_weighted_dot(ck, d, w)) / (cn * dn))
    info = DirectionInfo(_weighted_dot(c0, d, w), tuple(orth), regularized, G)
    return d, info


@dataclass(frozen=True)
class HistoryRecord:
    """One accepted iterate (iteration 0 is the starting point)."""

    iteration: int
    objective: float
    residuals: tuple
    step_size: float
    ascent: float
    orthogonality: tuple
    regularized: bool
    trials: int
    edge_ratio: float


@dataclass(frozen=True)
class GradientFlowOptions:
    """Iteration controls.

    Attributes
    ----------
    max_iter : int
        Iteration cap.
    tol : float
        Stop when ``J_max - J < tol`` (``J_max`` is the top eigenvalue of the
        observable, 1 for a projector).
    stall_tol, stall_window : float, int
        Stop when J changed by less than ``stall_tol`` over the last
        ``stall_window`` accepted steps.
    initial_phase_step : float
        Max-norm (rad) of the first phase update; fixes the first ``ds``.
    step_growth : float
        Factor applied to ``ds`` after each accepted step.
    min_step : float
        Smallest ``ds`` tried before giving up.
    restore_tol : float
        Constraint residuals above ``restore_tol * peak |E|`` trigger a
        Newton correction along the filtered constraint gradients.
    restore_max_iter : int
    feasibility_tol : float
        Trial points with residuals above ``feasibility_tol * peak |E|`` are
        rejected.
    rcond : float
        Relative eigenvalue cut-off for the Gamma pseudo-inverse.
    """

    max_iter: int = 200
    tol: float = 1e-4
    stall_tol: float = 1e-10
    stall_window: int = 10
    initial_phase_step: float = 0.05
    step_growth: float = 1.5
    min_step: float = 1e-12
    restore_tol: float = 1e-6
    restore_max_iter: int = 5
    feasibility_tol: float = 1e-3
    rcond: float = 1e-12

    def __post_init__(self):
        if int(self.max_iter) != self.max_iter or self.max_iter < 0:
            raise ValueError("max_iter must be a non-negative integer")
        for name in ("tol", "initial_phase_step", "step_growth", "min_step",
                     "restore_tol", "feasibility_tol", "rcond"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        if self.stall_tol < 0 or self.stall_window < 1:
            raise ValueError("stall_tol must be >= 0 and stall_window >= 1")


@dataclass
class GradientFlowState:
    """Result of a gradient-flow run.

    Attributes
    ----------
    field : SpectralField
        Final field.
    iteration : int
        Number of accepted steps.
    step_size : float
        Last accepted ``ds``.
    history : list of HistoryRecord
        Starting point followed by every accepted iterate.
    converged : bool
    reason : str
        ``"objective"``, ``"stalled"``, ``"step"``, ``"stationary"`` or
        ``"max_iter"``.
    initial_field : SpectralField
        Field before the initial feasibility restoration.
    wall_time : float
    """

    field: SpectralField
    iteration: int = 0
    step_size: float = 0.0
    history: list = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    initial_field: SpectralField | None = None
    wall_time: float = 0.0

    @property
    def objective(self) -> float:
        return self.history[-1].objective

    def objectives(self) -> np.ndarray:
        return np.array([h.objective for h in self.history])


def _edge_ratio(residuals, peak):
    r = np.max(np.abs(residuals), initial=0.0)
    return float(r / peak) if peak > 0 else (0.0 if r == 0 else math.inf)


def restore_feasibility(field: SpectralField, constraints: ConstraintSet, scale: float,
                        tol: float = 1e-10, max_iter: int = 200) -> SpectralField:
    """Smallest phase correction that satisfies all constraints.

    The correction is sought in the span of the constant phase and the
    per-constraint patterns of :meth:`EndpointConstraint.restoration_basis`,
    minimizing the ``A^2``-weighted mean square of the correction subject
    to ``f_k = C_k`` (SLSQP). This is needed because the linearized
    constraint Jacobian can be rank deficient at symmetric starting points.

    Parameters
    ----------
    field : SpectralField
    constraints : ConstraintSet
    scale : float
        Field scale used to normalize the residuals (e.g. the peak field).
    tol : float
        Required ``max |f_k - C_k| / scale``.

    Returns
    -------
    SpectralField

    Raises
    ------
    RuntimeError
        If no feasible correction is found.
    """
    if len(constraints) == 0 or _edge_ratio(constraints.residuals(field), scale) <= tol:
        return field
    cols = [np.ones(field.grid.n_points)]
    for c in constraints:
        cols.extend(c.restoration_basis(field))
    B = np.column_stack(cols)
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    B = U[:, s > 1e-10 * s[0]]
    wt = field.grid.weights * field.amplitude ** 2
    wt = wt / np.sum(wt)
    phi0 = field.phase

    def cost(a):
        dphi = B @ a
        return float(np.sum(wt * dphi ** 2))

    def cost_grad(a):
        return 2.0 * B.T @ (wt * (B @ a))

    def cons(a):
        return constraints.residuals(field.with_phase(phi0 + B @ a)) / scale

    def cons_jac(a):
        f = field.with_phase(phi0 + B @ a)
        return constraints.coefficients(f) * field.grid.weights[None, :] @ B / scale

    best, best_cost = None, math.inf
    for seed in (1e-2, 1e-1, -1e-2, 1e-3):
        a0 = np.full(B.shape[1], seed)
        res = minimize(cost, a0, jac=cost_grad, method="SLSQP",
                       constraints=[{"type": "eq", "fun": cons, "jac": cons_jac}],
                       options={"ftol": 1e-16, "maxiter": max_iter})
        if not res.success or np.max(np.abs(cons(res.x))) > tol:
            continue
        if cost(res.x) < best_cost:
            best, best_cost = res.x, cost(res.x)
    if best is None:
        raise RuntimeError(
            "could not restore the end-point constraints from the initial phase; "
            "start from a field that vanishes at the window edges")
    return field.with_phase(phi0 + B @ best)


def _check_finite(value, grad):
    if not np.isfinite(value):
        raise FloatingPointError(f"objective evaluated to {value}")
    if grad is not None and not np.all(np.isfinite(grad)):
        raise FloatingPointError("objective gradient contains non-finite values")


def run_gradient_flow(problem, constraints: ConstraintSet | None = None,
                      filter: FilterFunction | None = None,
                      options: GradientFlowOptions | None = None,
                      initial_phase=None, callback=None) -> GradientFlowState:
    """Maximize ``problem``'s objective over the spectral phase.

    Each iteration propagates, forms the phase gradient, projects it with
    :func:`constrained_update_direction` and searches along it with a
    backtracking step (grown by ``step_growth`` after acceptance, halved
    on any decrease of J). Trial points whose end-point residuals exceed
    ``restore_tol`` of the peak field are pulled back with Newton steps
    that leave J unchanged to first order.

    Parameters
    ----------
    problem : object
        Provides ``base_field`` (SpectralField), ``target_value`` and
        ``evaluate(phase, gradient=True)`` returning an object with
        ``value``, ``gradient`` and ``field_samples``.
    constraints : ConstraintSet, optional
        Defaults to ``problem.constraints()``.
    filter : FilterFunction, optional
        Defaults to a 5000 cm^-1 kernel.
    options : GradientFlowOptions, optional
    initial_phase : array_like, optional
        Defaults to the flat phase of ``problem.base_field``.
    callback : callable, optional
        Called with each new :class:`HistoryRecord`.

    Returns
    -------
    GradientFlowState
    """
    t_start = time.perf_counter()
    opts = options or GradientFlowOptions()
    filt = filter or FilterFunction.from_wavenumber(5000.0)
    cons = problem.constraints() if constraints is None else constraints
    base = problem.base_field
    phase = base.phase if initial_phase is None else np.asarray(initial_phase, dtype=float)
    fld = base.with_phase(phase)
    initial_field = fld
    S = filt.matrix(fld.grid)
    w = fld.grid.weights

    ev = problem.evaluate(fld.phase, gradient=False)
    peak = float(np.max(np.abs(ev.field_samples)))
    if len(cons) and _edge_ratio(cons.residuals(fld), peak) > opts.restore_tol:
        fld = restore_feasibility(fld, cons, peak, tol=1e-3 * opts.restore_tol)
        logger.info("initial phase corrected to satisfy the end-point constraints")

    ev = problem.evaluate(fld.phase, gradient=True)
    _check_finite(ev.value, ev.gradient)
    peak = float(np.max(np.abs(ev.field_samples)))
    res0 = cons.residuals(fld)
    state = GradientFlowState(field=fld, initial_field=initial_field)
    rec = HistoryRecord(0, float(ev.value), tuple(res0 / peak if peak else res0), 0.0,
                        math.nan, tuple(math.nan for _ in cons), False, 0,
                        _edge_ratio(res0, peak))
    state.history.append(rec)
    if callback:
        callback(rec)
    target = float(problem.target_value)

    def newton_restore(f, c0, pk):
        for _ in range(opts.restore_max_iter):
            r = cons.residuals(f)
            if _edge_ratio(r, pk) <= opts.restore_tol:
                break
            dphi = constrained_update_direction(
                c0, cons, filt, f, rates=np.concatenate([[0.0], -r]),
                filter_matrix=S, rcond=opts.rcond)
            f = f.with_phase(f.phase + dphi)
        return f

    J = float(ev.value)
    ds = None
    reason = "max_iter"
    while True:
        if target - J < opts.tol:
            reason = "objective"
            break
        if state.iteration >= opts.max_iter:
            reason = "max_iter"
            break
        hist = state.history
        if (len(hist) > opts.stall_window
                and abs(hist[-1].objective - hist[-1 - opts.stall_window].objective) < opts.stall_tol):
            reason = "stalled"
            break
        d, info = constrained_update_direction(ev.gradient, cons, filt, fld, filter_matrix=S,
                                               rcond=opts.rcond, return_info=True)
        dmax = float(np.max(np.abs(d)))
        if dmax == 0.0 or not info.ascent > 0:
            reason = "stationary"
            break
        if ds is None:
            ds = opts.initial_phase_step / dmax
        else:
            ds *= opts.step_growth
        trials = 0
        accepted = None
        while ds >= opts.min_step:
            trials += 1
            trial = fld.with_phase(fld.phase + ds * d)
            trial = newton_restore(trial, ev.gradient, peak)
            tev = problem.evaluate(trial.phase, gradient=True)
            _check_finite(tev.value, None)
            tpeak = float(np.max(np.abs(tev.field_samples)))
            ok_edges = _edge_ratio(cons.residuals(trial), tpeak) <= opts.feasibility_tol
            if tev.value >= J and ok_edges and np.all(np.isfinite(tev.gradient)):
                accepted = (trial, tev, tpeak)
                break
            ds *= 0.5
        if accepted is None:
            reason = "step"
            break
        fld, ev, peak = accepted
        J = float(ev.value)
        state.iteration += 1
        state.step_size = ds
        res = cons.residuals(fld)
        rec = HistoryRecord(state.iteration, J, tuple(res / peak), ds, info.ascent,
                            info.orthogonality, info.regularized, trials,
                            _edge_ratio(res, peak))
        state.history.append(rec)
        if callback:
            callback(rec)
    state.field = fld
    state.reason = reason
    state.converged = reason in ("objective", "stalled", "stationary")
    state.wall_time = time.perf_counter() - t_start
    return state


class GradientFlowOptimizer(BaseEstimator):
    """Estimator wrapper around :func:`run_gradient_flow`.

    Parameters
    ----------
    sigma : float, default=5000.0
        Filter width in cm^-1.
    max_iter : int, default=200
    tol : float, default=1e-4
    stall_tol : float, default=1e-10
    stall_window : int, default=10
    initial_phase_step : float, default=0.05
    step_growth : float, default=1.5
    min_step : float, default=1e-12
    restore_tol : float, default=1e-6
    feasibility_tol : float, default=1e-3
    constrained : bool, default=True
        Enforce the problem's end-point constraints.

    Attributes
    ----------
    phase_ : ndarray
        Optimized spectral phase.
    objective_ : float
    history_ : list of HistoryRecord
    n_iter_ : int
    state_ : GradientFlowState

    Examples
    --------
    >>> from pulseopt.objectives import rb_transfer_problem
    >>> problem = rb_transfer_problem(target_level=3, horizon=200.0, n_time=2048)
    >>> opt = GradientFlowOptimizer(sigma=50.0, max_iter=3).fit(problem)
    >>> opt.n_iter_
    3
    """

    def __init__(self, sigma=5000.0, max_iter=200, tol=1e-4, stall_tol=1e-10,
                 stall_window=10, initial_phase_step=0.05, step_growth=1.5,
                 min_step=1e-12, restore_tol=1e-6, feasibility_tol=1e-3,
                 constrained=True):
        self.sigma = sigma
        self.max_iter = max_iter
        self.tol = tol
        self.stall_tol = stall_tol
        self.stall_window = stall_window
        self.initial_phase_step = initial_phase_step
        self.step_growth = step_growth
        self.min_step = min_step
        self.restore_tol = restore_tol
        self.feasibility_tol = feasibility_tol
        self.constrained = constrained

    def _options(self) -> GradientFlowOptions:
        return GradientFlowOptions(
            max_iter=self.max_iter, tol=self.tol, stall_tol=self.stall_tol,
            stall_window=self.stall_window, initial_phase_step=self.initial_phase_step,
            step_growth=self.step_growth, min_step=self.min_step,
            restore_tol=self.restore_tol, feasibility_tol=self.feasibility_tol)

    def fit(self, problem, initial_phase=None, callback=None):
        """Run the flow on ``problem`` and store the optimized phase."""
        filt = FilterFunction.from_wavenumber(self.sigma)
        cons = problem.constraints() if self.constrained else ConstraintSet()
        state = run_gradient_flow(problem, cons, filt, self._options(),
                                  initial_phase=initial_phase, callback=callback)
        self.state_ = state
        self.phase_ = np.array(state.field.phase)
        self.objective_ = state.objective
        self.history_ = list(state.history)
        self.n_iter_ = state.iteration
        return self

    def score(self, problem) -> float:
        """Objective of ``problem`` at the fitted phase."""
        check_is_fitted(self, "phase_")
        return float(problem.evaluate(self.phase_, gradient=False).value)

