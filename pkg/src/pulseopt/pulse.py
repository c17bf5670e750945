"""Spectral pulse representation and time-domain synthesis.

Sign convention
---------------
A spectral field with amplitude ``A`` and phase ``phi`` on the grid
``omega_j`` (trapezoid weights ``w_j``) is synthesized as

    eps_plus(t) = sum_j w_j A_j exp(i (phi_j - omega_j (t - t_c)))
    E(t)        = Re eps_plus(t) = sum_j w_j A_j cos(phi_j - omega_j (t - t_c))

where ``t_c`` is the time origin of the spectral phase (the centre of a
transform-limited pulse). With this convention the group delay is
``+dphi/domega``, so a positive quadratic coefficient ``beta0`` stretches
the pulse with frequencies rising in time (an up-chirp).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import CZT

from .units import UNITS, FrequencyGrid, TimeGrid, UnitSystem

__all__ = [
    "SpectralField",
    "ChirpFit",
    "BENCHMARK_PULSE",
    "synthesize",
    "analytic_signal",
    "spectral_sum",
    "spectral_sum_transpose",
    "gaussian_benchmark_amplitude",
    "fit_quadratic_phase",
    "field_endpoint",
    "endpoint_coefficient",
    "envelope_fwhm",
]

# E0 (V/cm), carrier and bandwidth (cm^-1) of the Rb benchmark pulse
BENCHMARK_PULSE = {"peak_field_v_per_cm": 3.6e6, "carrier_cm": 12698.0, "bandwidth_cm": 177.0}

_DENSE_LIMIT = 1 << 20


@dataclass(frozen=True)
class SpectralField:
    """Spectral amplitude and phase sampled on a frequency grid.

    Parameters
    ----------
    grid : FrequencyGrid
    amplitude : array_like
        Non-negative amplitude, internal field units per rad/fs.
    phase : array_like, optional
        Spectral phase in radians; zero (transform limited) by default.
    """

    grid: FrequencyGrid
    amplitude: np.ndarray
    phase: np.ndarray = None

    def __post_init__(self):
        a = np.array(self.amplitude, dtype=float)
        p = np.zeros_like(a) if self.phase is None else np.array(self.phase, dtype=float)
        n = self.grid.n_points
        if a.shape != (n,) or p.shape != (n,):
            raise ValueError(
                f"amplitude/phase lengths {a.shape}/{p.shape} do not match the grid ({n})")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
            raise ValueError("amplitude and phase must be finite")
        if np.any(a < 0):
            raise ValueError("amplitude must be non-negative")
        a.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "amplitude", a)
        object.__setattr__(self, "phase", p)

    @property
    def omega(self) -> np.ndarray:
        return self.grid.points

    def with_phase(self, phase) -> "SpectralField":
        return SpectralField(self.grid, self.amplitude, phase)

    def with_amplitude(self, amplitude) -> "SpectralField":
        return SpectralField(self.grid, amplitude, self.phase)

    def weighted_spectrum(self) -> np.ndarray:
        """``w_j A_j exp(i phi_j)``, the coefficients of the synthesis sum."""
        return self.grid.weights * self.amplitude * np.exp(1j * self.phase)

    def spectral_energy(self) -> float:
        """``pi * int A^2 domega``, equal to ``int E(t)^2 dt`` for a contained pulse."""
        return float(math.pi * np.sum(self.grid.weights * self.amplitude ** 2))


@lru_cache(maxsize=16)
def _czt_plan(n_in: int, n_out: int, step: float) -> CZT:
    return CZT(n_in, n_out, w=np.exp(-1j * step), a=1.0)


def spectral_sum(coeffs, freq: FrequencyGrid, tau0: float, dtau: float,
                 n_tau: int) -> np.ndarray:
    """``y_i = sum_j c_j exp(-i omega_j tau_i)`` with ``tau_i = tau0 + i dtau``.

    Small problems use the dense kernel; large ones a chirp z-transform.
    """
    c = np.asarray(coeffs, dtype=complex)
    tau = tau0 + dtau * np.arange(n_tau)
    if c.shape[-1] * n_tau <= _DENSE_LIMIT:
        K = np.exp(-1j * np.outer(tau, freq.points))
        return c @ K.T
    j = np.arange(freq.n_points)
    x = c * np.exp(-1j * j * freq.spacing * tau0)
    y = _czt_plan(freq.n_points, n_tau, freq.spacing * dtau)(x)
    return y * np.exp(-1j * freq.omega_min * tau)


def spectral_sum_transpose(values, freq: FrequencyGrid, tau0: float,
                           dtau: float) -> np.ndarray:
    """``z_j = sum_i y_i exp(-i omega_j tau_i)`` (transpose of :func:`spectral_sum`)."""
    y = np.asarray(values, dtype=complex)
    n_tau = y.shape[-1]
    tau = tau0 + dtau * np.arange(n_tau)
    if freq.n_points * n_tau <= _DENSE_LIMIT:
        K = np.exp(-1j * np.outer(tau, freq.points))
        return y @ K
    j = np.arange(freq.n_points)
    z = _czt_plan(n_tau, freq.n_points, freq.spacing * dtau)(y * np.exp(-1j * freq.omega_min * tau))
    return z * np.exp(-1j * j * freq.spacing * tau0)


def analytic_signal(field: SpectralField, grid: TimeGrid, t_center: float = 0.0) -> np.ndarray:
    """Complex field ``eps_plus(t_i)`` whose real part is the physical field."""
    return spectral_sum(field.weighted_spectrum(), field.grid, grid.t_start - t_center,
                        grid.spacing, grid.n_points)


def synthesize(field: SpectralField, grid: TimeGrid, t_center: float = 0.0) -> np.ndarray:
    """Real temporal field on ``grid`` by trapezoid quadrature over frequency.

    Parameters
    ----------
    field : SpectralField
    grid : TimeGrid
    t_center : float
        Time at which a flat-phase pulse peaks (fs).

    Returns
    -------
    ndarray, shape (grid.n_points,)
    """
    if not isinstance(grid, TimeGrid):
        raise TypeError("grid must be a TimeGrid")
    return analytic_signal(field, grid, t_center).real


def field_endpoint(field: SpectralField, t: float, t_center: float = 0.0) -> float:
    """Field value ``E(t)`` with the same quadrature as :func:`synthesize`."""
    arg = field.phase - field.omega * (t - t_center)
    return float(np.sum(field.grid.weights * field.amplitude * np.cos(arg)))


def endpoint_coefficient(field: SpectralField, t: float, t_center: float = 0.0) -> np.ndarray:
    """Phase-gradient density of :func:`field_endpoint`, ``-A sin(phi - omega (t - t_c))``."""
    arg = field.phase - field.omega * (t - t_center)
    return -field.amplitude * np.sin(arg)


def gaussian_benchmark_amplitude(grid: FrequencyGrid, units: UnitSystem = UNITS, *,
                                 peak_field: float | None = None,
                                 carrier: float | None = None,
                                 bandwidth: float | None = None) -> SpectralField:
    """Gaussian spectrum ``E0 / (sqrt(2 pi) dw) exp(-(w - w0)^2 / (2 dw^2))`` with flat phase.

    Defaults are the Rb benchmark pulse: E0 = 3.6e6 V/cm, w0 = 12698 cm^-1 and
    dw = 177 cm^-1, converted to internal units. Overrides are internal units.
    """
    e0 = units.field_to_internal(BENCHMARK_PULSE["peak_field_v_per_cm"]) if peak_field is None else peak_field
    w0 = units.wavenumber_to_angular_frequency(BENCHMARK_PULSE["carrier_cm"]) if carrier is None else carrier
    dw = units.wavenumber_to_angular_frequency(BENCHMARK_PULSE["bandwidth_cm"]) if bandwidth is None else bandwidth
    w = grid.points
    amp = e0 / (math.sqrt(2.0 * math.pi) * dw) * np.exp(-((w - w0) ** 2) / (2.0 * dw ** 2))
    return SpectralField(grid, amp, np.zeros(grid.n_points))


@dataclass(frozen=True)
class ChirpFit:
    """Quadratic phase model ``phi(w) ~ constant_shift + beta0 (w - omega_c)^2``.

    Attributes
    ----------
    beta0 : float
        Chirp rate in fs^2.
    omega_c : float
        Modulated frequency in rad/fs (NaN when ``beta0 == 0``).
    constant_shift : float
        Phase at ``omega_c`` in rad (the fitted mean phase when ``beta0 == 0``).
    r_squared : float
        Coefficient of determination of the (weighted) fit.
    """

    beta0: float
    omega_c: float
    constant_shift: float
    r_squared: float

    def omega_c_wavenumber(self, units: UnitSystem = UNITS) -> float:
        return float(units.angular_frequency_to_wavenumber(self.omega_c))


def fit_quadratic_phase(field: SpectralField, weight_by_amplitude: bool = True) -> ChirpFit:
    """Least-squares fit of the spectral phase to a parabola.

    Parameters
    ----------
    field : SpectralField
    weight_by_amplitude : bool
        Weight residuals by ``A(w)^2`` (default) or uniformly.

    Returns
    -------
    ChirpFit

    Raises
    ------
    ValueError
        If fewer than three points carry weight.
    """
    w = field.omega
    wt = field.amplitude ** 2 if weight_by_amplitude else np.ones_like(w)
    if not np.any(field.amplitude > 0):
        raise ValueError("amplitude is identically zero")
    support = wt > 0
    if np.count_nonzero(support) < 3:
        raise ValueError("quadratic fit needs at least 3 points with non-zero weight")
    wt = wt / wt.max()
    wbar = float(np.sum(wt * w) / np.sum(wt))
    x = w - wbar
    scale = float(np.sqrt(np.sum(wt * x ** 2) / np.sum(wt)))
    xs = x / scale
    X = np.column_stack([np.ones_like(xs), xs, xs ** 2])
    sw = np.sqrt(wt)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], field.phase * sw, rcond=None)
    c0, c1, c2 = coef[0], coef[1] / scale, coef[2] / scale ** 2
    resid = field.phase - X @ coef
    mean = np.sum(wt * field.phase) / np.sum(wt)
    ss_tot = float(np.sum(wt * (field.phase - mean) ** 2))
    ss_res = float(np.sum(wt * resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 * max(1.0, float(np.sum(wt * field.phase ** 2))) else 1.0 - ss_res / ss_tot
    r2 = min(1.0, max(0.0, r2))
    if abs(c2) <= 1e-12 * max(1.0, abs(c1) * scale, abs(c0)) / scale ** 2:
        return ChirpFit(0.0, float("nan"), float(mean), r2)
    xc = -c1 / (2.0 * c2)
    return ChirpFit(float(c2), float(wbar + xc), float(c0 - c2 * xc ** 2), r2)


def envelope_fwhm(times, envelope) -> float:
    """Full width at half maximum of a single-peaked envelope (linear interpolation)."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(envelope, dtype=float)
    k = int(np.argmax(y))
    half = 0.5 * y[k]
    above = np.nonzero(y >= half)[0]
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == y.size - 1:
        raise ValueError("envelope does not fall below half maximum inside the window")
    tl = t[lo - 1] + (half - y[lo - 1]) * (t[lo] - t[lo - 1]) / (y[lo] - y[lo - 1])
    tr = t[hi] + (half - y[hi]) * (t[hi + 1] - t[hi]) / (y[hi + 1] - y[hi])
    return float(tr - tl)
