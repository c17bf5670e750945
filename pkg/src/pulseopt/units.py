"""Unit conversions and uniform time/frequency grids.

Internal units
--------------
time            fs
angular freq.   rad/fs (energies are stored as E/hbar in rad/fs)
dipole          atomic units (e a0)
field           rad/fs per atomic unit of dipole, so ``mu * E`` is a rate in rad/fs

Conversions from laboratory units (cm^-1, V/cm, a.u.) happen only here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "UnitSystem",
    "UNITS",
    "TimeGrid",
    "FrequencyGrid",
    "wavenumber_to_angular_frequency",
    "angular_frequency_to_wavenumber",
    "trapezoid_weights",
    "make_grids",
]


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants and laboratory-to-internal conversion factors.

    Parameters
    ----------
    speed_of_light : float
        Speed of light in cm/s.
    hbar : float
        Reduced Planck constant in eV fs.
    bohr_radius : float
        Bohr radius in m.
    """

    speed_of_light: float = 2.99792458e10
    hbar: float = 0.6582119569
    bohr_radius: float = 5.29177210903e-11

    @property
    def wavenumber_factor(self) -> float:
        """rad/fs per cm^-1."""
        return 2.0 * math.pi * self.speed_of_light * 1e-15

    @property
    def field_factor(self) -> float:
        """Internal field units per V/cm.

        A dipole of 1 a.u. (e a0) in a field of 1 V/cm has interaction
        energy a0[cm] eV, which divided by hbar gives a rate in rad/fs.
        """
        return self.bohr_radius * 100.0 / self.hbar

    def wavenumber_to_angular_frequency(self, k):
        return np.multiply(k, self.wavenumber_factor)

    def angular_frequency_to_wavenumber(self, omega):
        return np.divide(omega, self.wavenumber_factor)

    def field_to_internal(self, e_v_per_cm):
        return np.multiply(e_v_per_cm, self.field_factor)

    def field_from_internal(self, e_internal):
        return np.divide(e_internal, self.field_factor)

    def dipole_to_internal(self, mu_au):
        # dipoles stay in atomic units; the field carries the conversion
        return np.asarray(mu_au, dtype=float) * 1.0

    def dipole_from_internal(self, mu):
        return np.asarray(mu, dtype=float) * 1.0

    def time_to_internal(self, t_fs):
        return np.asarray(t_fs, dtype=float) * 1.0

    def chirp_to_fs2(self, beta):
        # phase curvature in rad/(rad/fs)^2 is already fs^2
        return float(beta)


UNITS = UnitSystem()


def wavenumber_to_angular_frequency(k):
    """Convert a wavenumber in cm^-1 to angular frequency in rad/fs.

    Parameters
    ----------
    k : float or array_like
        Wavenumber(s) in cm^-1.

    Returns
    -------
    float or ndarray
        ``2 pi c k`` in rad/fs.

    Examples
    --------
    >>> round(float(wavenumber_to_angular_frequency(177.0)), 6)
    0.033341
    """
    k_arr = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k_arr)):
        raise ValueError("wavenumber must be finite")
    out = UNITS.wavenumber_to_angular_frequency(k_arr)
    return float(out) if out.ndim == 0 else out


def angular_frequency_to_wavenumber(omega):
    """Inverse of :func:`wavenumber_to_angular_frequency`."""
    out = UNITS.angular_frequency_to_wavenumber(np.asarray(omega, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def trapezoid_weights(n_points: int, spacing: float) -> np.ndarray:
    """Composite trapezoid weights for ``n_points`` equally spaced nodes."""
    w = np.full(n_points, float(spacing))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


class _UniformGrid:
    """Shared behaviour of the uniform grids."""

    _lo: float
    _hi: float
    n_points: int

    @property
    def spacing(self) -> float:
        return (self._hi - self._lo) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self._lo, self._hi, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n_points, self.spacing)

    def __len__(self) -> int:
        return self.n_points

    def _validate(self, name: str):
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points:
            raise TypeError(f"{name}.n_points must be an integer")
        if self.n_points < 2:
            raise ValueError(f"{name} needs at least 2 points, got {self.n_points}")
        if not (math.isfinite(self._lo) and math.isfinite(self._hi)):
            raise ValueError(f"{name} bounds must be finite")
        if not self._hi > self._lo:
            raise ValueError(f"{name} must be strictly increasing ({self._lo} >= {self._hi})")


@dataclass(frozen=True)
class TimeGrid(_UniformGrid):
    """Uniform time grid on ``[t_start, t_end]`` in fs."""

    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(self.t_end))
        self._validate("TimeGrid")

    @property
    def _lo(self):
        return self.t_start

    @property
    def _hi(self):
        return self.t_end

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def refined(self, factor: int = 2) -> "TimeGrid":
        """Grid with the spacing divided by ``factor`` (nodes are kept)."""
        return TimeGrid(self.t_start, self.t_end, (self.n_points - 1) * factor + 1)


@dataclass(frozen=True)
class FrequencyGrid(_UniformGrid):
    """Uniform angular-frequency grid on ``[omega_min, omega_max]`` in rad/fs."""

    omega_min: float
    omega_max: float
    n_points: int

    def __post_init__(self):
        object.__setattr__(self, "omega_min", float(self.omega_min))
        object.__setattr__(self, "omega_max", float(self.omega_max))
        self._validate("FrequencyGrid")
        if self.omega_min < 0:
            raise ValueError("FrequencyGrid must lie on the positive axis")

    @property
    def _lo(self):
        return self.omega_min

    @property
    def _hi(self):
        return self.omega_max

    @classmethod
    def around(cls, carrier: float, bandwidth: float, n_points: int = 512,
               half_width: float = 5.0) -> "FrequencyGrid":
        """Symmetric window ``carrier +- half_width * bandwidth``."""
        return cls(carrier - half_width * bandwidth, carrier + half_width * bandwidth, n_points)


def make_grids(duration: float, carrier: float, bandwidth: float, *,
               n_time: int | None = None, time_step: float | None = None,
               n_freq: int = 512, half_width: float = 5.0,
               t_start: float = 0.0) -> tuple[TimeGrid, FrequencyGrid]:
    """Build the time grid on ``[t_start, t_start + duration]`` and the frequency window.

    Parameters
    ----------
    duration : float
        Control horizon T in fs.
    carrier, bandwidth : float
        Carrier and Gaussian width of the spectrum in rad/fs.
    n_time : int, optional
        Number of time nodes. Mutually exclusive with ``time_step``; the
        default is 16384 nodes, fine enough that halving the step moves
        the Rb benchmark populations by less than 1e-6.
    time_step : float, optional
        Largest admissible spacing in fs; the node count is rounded up.
    n_freq : int
        Number of frequency nodes.
    half_width : float
        Window half-width in units of ``bandwidth``.

    Returns
    -------
    (TimeGrid, FrequencyGrid)

    Raises
    ------
    ValueError
        If the time spacing exceeds ``pi / omega_max`` (Nyquist) or a grid is
        degenerate.
    """
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if not (bandwidth > 0 and carrier > 0):
        raise ValueError("carrier and bandwidth must be positive")
    if n_time is not None and time_step is not None:
        raise ValueError("give n_time or time_step, not both")
    if time_step is not None:
        if not time_step > 0:
            raise ValueError("time_step must be positive")
        n_time = int(math.ceil(duration / time_step - 1e-12)) + 1
    elif n_time is None:
        n_time = 16384
    freq = FrequencyGrid.around(carrier, bandwidth, n_freq, half_width)
    time = TimeGrid(t_start, t_start + duration, n_time)
    nyquist = math.pi / freq.omega_max
    if time.spacing > nyquist:
        raise ValueError(
            f"time spacing {time.spacing:.4g} fs exceeds the Nyquist limit "
            f"pi/omega_max = {nyquist:.4g} fs")
    return time, freq
