"""Optimization problems: Rb state transfer and simulated pulse-shaper signals.

Two families share the optimizers:

* :class:`StateTransferProblem` - final-time population of a target level
  of a driven quantum system, differentiable in the spectral phase.
* :class:`ShaperProblem` - black-box signals of a pixelated phase shaper
  (80 groups of 8 pixels by default): the two-photon absorption (TPA)
  yield and a synthetic multimodal "ratio" landscape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gradient_flow import ConstraintSet, EndpointConstraint
from .gradients import phase_gradient, temporal_gradient
from .pulse import SpectralField, gaussian_benchmark_amplitude, synthesize
from .quantum import (Observable, PropagationResult, QuantumSystem, as_state, basis_state,
                      propagate, rb_benchmark_system)
from .units import UNITS, TimeGrid, UnitSystem, make_grids

__all__ = [
    "Evaluation",
    "StateTransferProblem",
    "rb_transfer_problem",
    "evaluate_transfer",
    "ShaperProblem",
    "SurrogateParams",
    "evaluate_tpa",
    "evaluate_surrogate_ratio",
    "negative_sphere",
]


@dataclass(frozen=True)
class Evaluation:
    """Objective value with the by-products of one propagation."""

    value: float
    gradient: np.ndarray | None
    field_samples: np.ndarray
    result: PropagationResult = field(repr=False)
    temporal_gradient: np.ndarray | None = field(default=None, repr=False)


class StateTransferProblem:
    """Maximize ``|<j|psi(T)>|^2`` over the spectral phase.

    Parameters
    ----------
    system : QuantumSystem
    target : int
        0-based index of the level to populate.
    base_field : SpectralField
        Fixed amplitude; its phase is the default starting point.
    time_grid : TimeGrid
        Control window ``[0, T]``.
    initial : array_like, optional
        Initial state, lowest level by default.
    t_center : float, optional
        Time origin of the spectral phase; the window centre by default.
    """

    def __init__(self, system: QuantumSystem, target: int, base_field: SpectralField,
                 time_grid: TimeGrid, initial=None, t_center: float | None = None):
        if not 0 <= int(target) < system.dim:
            raise ValueError(f"target level {target} outside 0..{system.dim - 1}")
        if not time_grid.duration > 0:
            raise ValueError("horizon must be positive")
        self.system = system
        self.target = int(target)
        self.base_field = base_field
        self.time_grid = time_grid
        self.initial = basis_state(system.dim, 0) if initial is None else as_state(initial, system.dim)
        self.t_center = 0.5 * (time_grid.t_start + time_grid.t_end) if t_center is None else float(t_center)
        self.observable = Observable.projector(system.dim, self.target)

    @property
    def horizon(self) -> float:
        return self.time_grid.duration

    @property
    def target_value(self) -> float:
        return self.observable.max_value

    def _phase(self, phase) -> np.ndarray:
        p = self.base_field.phase if phase is None else np.asarray(phase, dtype=float)
        if p.shape != self.base_field.phase.shape:
            raise ValueError(f"phase has shape {p.shape}, expected {self.base_field.phase.shape}")
        return p

    def field(self, phase=None) -> SpectralField:
        return self.base_field.with_phase(self._phase(phase))

    def temporal_field(self, phase=None) -> np.ndarray:
        return synthesize(self.field(phase), self.time_grid, self.t_center)

    def propagate(self, phase=None) -> PropagationResult:
        return propagate(self.system, self.temporal_field(phase), self.time_grid, self.initial)

    def evaluate(self, phase=None, gradient: bool = True) -> Evaluation:
        """Objective, and optionally its phase-gradient density."""
        fld = self.field(phase)
        samples = synthesize(fld, self.time_grid, self.t_center)
        res = propagate(self.system, samples, self.time_grid, self.initial)
        psi = res.final_state
        value = float(np.abs(psi[self.target]) ** 2)
        if not gradient:
            return Evaluation(value, None, samples, res)
        g = temporal_gradient(self.system, res, self.initial, self.observable)
        c0 = phase_gradient(fld, g, self.time_grid, self.t_center)
        return Evaluation(value, c0, samples, res, g)

    def constraints(self) -> ConstraintSet:
        """Field switched off at both window edges."""
        return ConstraintSet((EndpointConstraint(self.time_grid.t_start, self.t_center),
                              EndpointConstraint(self.time_grid.t_end, self.t_center)))


def rb_transfer_problem(target_level: int = 2, horizon: float = 200.0, *,
                        n_time: int | None = None, time_step: float | None = None,
                        n_freq: int = 512, units: UnitSystem = UNITS) -> StateTransferProblem:
    """Rb three-level benchmark driven by the Gaussian pulse from the ground state.

    Parameters
    ----------
    target_level : int
        Level label 1, 2 or 3 (1 is the ground state).
    horizon : float
        Control window T in fs.
    n_time, time_step : optional
        Time resolution, see :func:`pulseopt.units.make_grids`.
    n_freq : int
        Number of frequency nodes over the carrier +- 5 bandwidths window.
    """
    if target_level not in (1, 2, 3):
        raise ValueError(f"target_level must be 1, 2 or 3, got {target_level}")
    system = rb_benchmark_system(units)
    carrier = float(units.wavenumber_to_angular_frequency(12698.0))
    bandwidth = float(units.wavenumber_to_angular_frequency(177.0))
    tgrid, fgrid = make_grids(horizon, carrier, bandwidth, n_time=n_time,
                              time_step=time_step, n_freq=n_freq)
    base = gaussian_benchmark_amplitude(fgrid, units)
    return StateTransferProblem(system, target_level - 1, base, tgrid)


def evaluate_transfer(problem: StateTransferProblem, phase) -> float:
    """Target population ``|<j|psi(T)>|^2`` for the given spectral phase."""
    return problem.evaluate(phase, gradient=False).value


@dataclass(frozen=True)
class SurrogateParams:
    """Synthetic ratio landscape

        R(phi) = base + a (TPA(phi)/TPA_flat - 1)
                 + (b/D) sum_g [cos(m (phi_g - theta_g)) - cos(m theta_g)]

    with offsets ``theta_g`` drawn uniformly in ``[0, 2 pi)`` from ``seed``.
    ``R(0) = base`` exactly.
    """

    base: float = 2.0
    a: float = 0.2
    b: float = 1.0
    harmonic: int = 1
    seed: int = 2024

    def offsets(self, n_groups: int) -> np.ndarray:
        return np.random.default_rng(self.seed).uniform(0.0, 2.0 * math.pi, n_groups)


class ShaperProblem:
    """Pixelated spectral phase shaper acting on a Gaussian spectrum.

    Pixels tile ``carrier +- half_width * bandwidth`` uniformly, one
    frequency sample per pixel. Adjacent pixels are bundled in groups
    that share one phase; the amplitude mask is fixed at one.

    Parameters
    ----------
    n_pixels, group_size : int
        640 and 8 give 80 controls.
    phase_box : (float, float)
        Admissible group phase interval (closed).
    half_width : float
        Shaper half-span in units of the spectral width.
    surrogate : SurrogateParams
        Parameters of :func:`evaluate_surrogate_ratio`.
    """

    def __init__(self, n_pixels: int = 640, group_size: int = 8,
                 phase_box=(0.0, 2.0 * math.pi), half_width: float = 4.0,
                 surrogate: SurrogateParams | None = None):
        if n_pixels < 1 or group_size < 1 or n_pixels % group_size:
            raise ValueError("n_pixels must be a positive multiple of group_size")
        lo, hi = float(phase_box[0]), float(phase_box[1])
        if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
            raise ValueError(f"invalid phase box {phase_box}")
        self.n_pixels = int(n_pixels)
        self.group_size = int(group_size)
        self.phase_box = (lo, hi)
        self.half_width = float(half_width)
        self.surrogate = surrogate or SurrogateParams()
        # pixel centres in units of the spectral width
        x = (np.arange(n_pixels) + 0.5) / n_pixels * 2.0 - 1.0
        self._amplitude = np.exp(-0.5 * (self.half_width * x) ** 2)
        self._n_fft = 1 << int(math.ceil(math.log2(2 * n_pixels)))
        self._flat = float(self._tpa_pixels(np.zeros((1, n_pixels)))[0])
        self._theta = self.surrogate.offsets(self.n_groups)

    @property
    def n_groups(self) -> int:
        return self.n_pixels // self.group_size

    @property
    def amplitude(self) -> np.ndarray:
        return self._amplitude.copy()

    @property
    def bounds(self):
        return (np.full(self.n_groups, self.phase_box[0]), np.full(self.n_groups, self.phase_box[1]))

    @property
    def flat_tpa(self) -> float:
        """TPA of the transform-limited pulse, the global maximum."""
        return self._flat

    def check_phases(self, group_phases) -> np.ndarray:
        p = np.asarray(group_phases, dtype=float)
        if p.shape[-1] != self.n_groups or p.ndim > 2:
            raise ValueError(f"expected {self.n_groups} group phases, got shape {p.shape}")
        lo, hi = self.phase_box
        eps = 1e-12 * max(1.0, abs(lo), abs(hi))
        if not np.all(np.isfinite(p)) or np.any(p < lo - eps) or np.any(p > hi + eps):
            raise ValueError(f"group phases must lie in the box [{lo}, {hi}]")
        return p

    def expand(self, group_phases) -> np.ndarray:
        """Pixel phases, constant within each group."""
        return np.repeat(np.asarray(group_phases, dtype=float), self.group_size, axis=-1)

    def _tpa_pixels(self, pixel_phases) -> np.ndarray:
        # |eps+|^4 is a trigonometric polynomial of degree < n_fft, so the
        # sample mean over one period integrates it exactly.
        c = self._amplitude * np.exp(1j * np.atleast_2d(pixel_phases))
        y = np.fft.fft(c, n=self._n_fft, axis=-1)
        return np.mean(np.abs(y) ** 4, axis=-1)

    def tpa_pixels(self, pixel_phases) -> np.ndarray | float:
        """TPA yield for arbitrary pixel phases (no box check)."""
        p = np.asarray(pixel_phases, dtype=float)
        out = self._tpa_pixels(p)
        return float(out[0]) if p.ndim == 1 else out

    def surrogate_terms(self, group_phases):
        p = np.atleast_2d(group_phases)
        m = self.surrogate.harmonic
        return np.mean(np.cos(m * (p - self._theta)) - np.cos(m * self._theta), axis=-1)


def evaluate_tpa(problem: ShaperProblem, group_phases):
    """Two-photon absorption yield ``int |eps+(t)|^4 dt`` (relative units).

    Accepts one phase vector or a batch (rows). Values are normalized so
    the flat phase gives exactly ``problem.flat_tpa``.
    """
    p = problem.check_phases(group_phases)
    out = problem._tpa_pixels(problem.expand(np.atleast_2d(p)))
    return float(out[0]) if p.ndim == 1 else out


def evaluate_surrogate_ratio(problem: ShaperProblem, group_phases):
    """Synthetic ratio signal, see :class:`SurrogateParams`."""
    p = problem.check_phases(group_phases)
    s = problem.surrogate
    tpa = problem._tpa_pixels(problem.expand(np.atleast_2d(p))) / problem.flat_tpa
    out = s.base + s.a * (tpa - 1.0) + s.b * problem.surrogate_terms(p)
    return float(out[0]) if p.ndim == 1 else out


def negative_sphere(x):
    """``-sum x_j^2``; accepts a vector or a batch of row vectors."""
    x = np.asarray(x, dtype=float)
    out = -np.sum(x * x, axis=-1)
    return float(out) if x.ndim == 1 else out
