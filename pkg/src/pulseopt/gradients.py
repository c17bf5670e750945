"""Exact gradients of a final-time expectation value.

For ``J = <psi0| U(T)^dagger O U(T) |psi0>`` the propagator in
:func:`pulseopt.quantum.propagate` gives

    dJ/dE_i = w_i g_i,   g_i = -Im Tr{[rho0, U_T^dag O U_T] U_i^dag mu U_i}
                             = -2 Im <lambda_i| mu |psi_i>

with ``psi_i = U_i psi0`` and ``lambda_i = U_i U_T^dag O U_T psi0``. The
density ``g`` is the functional derivative dJ/dE(t); chaining through the
synthesis sum gives the spectral phase and amplitude gradients.
"""

from __future__ import annotations

import numpy as np

from .pulse import SpectralField, spectral_sum_transpose
from .quantum import Observable, PropagationResult, QuantumSystem, as_state
from .units import TimeGrid

__all__ = ["temporal_gradient", "phase_gradient", "amplitude_gradient", "spectral_gradients"]


def temporal_gradient(system: QuantumSystem, result: PropagationResult, initial,
                      obs: Observable) -> np.ndarray:
    """Functional derivative ``dJ/dE(t)`` on the time grid.

    Parameters
    ----------
    system : QuantumSystem
    result : PropagationResult
        Must hold the full unitary trajectory.
    initial : array_like
        Initial state.
    obs : Observable

    Returns
    -------
    ndarray, shape (n_t,)
        Density ``g``; multiply by the trapezoid weights for per-sample
        derivatives.
    """
    U = getattr(result, "unitary_trajectory", None)
    if U is None or np.ndim(U) != 3 or U.shape[0] != result.times.size:
        raise ValueError("propagation result carries no unitary trajectory")
    psi0 = as_state(initial, system.dim)
    if obs.dim != system.dim:
        raise ValueError("observable dimension does not match the system")
    UT = U[-1]
    psiT = UT @ psi0
    chi = UT.conj().T @ (obs.matrix @ psiT)      # U_T^dag O U_T psi0
    psi = U @ psi0
    lam = U @ chi
    mu_psi = psi @ system.dipole.T
    return -2.0 * np.imag(np.sum(np.conj(lam) * mu_psi, axis=1))


def _transposed(field: SpectralField, temporal_grad, time_grid: TimeGrid,
                t_center: float) -> np.ndarray:
    g = np.asarray(temporal_grad, dtype=float)
    if g.shape != (time_grid.n_points,):
        raise ValueError(
            f"temporal gradient has shape {g.shape}, time grid has {time_grid.n_points} points")
    return spectral_sum_transpose(g * time_grid.weights, field.grid,
                                  time_grid.t_start - t_center, time_grid.spacing)


def spectral_gradients(field: SpectralField, temporal_grad, time_grid: TimeGrid,
                       t_center: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Phase and amplitude gradient densities from a single transform."""
    z = np.exp(1j * field.phase) * _transposed(field, temporal_grad, time_grid, t_center)
    return -field.amplitude * z.imag, z.real


def phase_gradient(field: SpectralField, temporal_grad, time_grid: TimeGrid,
                   t_center: float = 0.0) -> np.ndarray:
    """``dJ/dphi(w) = int dJ/dE(t) * (-A(w) sin(phi(w) - w (t - t_c))) dt``.

    Returns a density over frequency: ``dJ/dphi_j = w_j * result_j`` for
    the discrete phase vector.
    """
    return spectral_gradients(field, temporal_grad, time_grid, t_center)[0]


def amplitude_gradient(field: SpectralField, temporal_grad, time_grid: TimeGrid,
                       t_center: float = 0.0) -> np.ndarray:
    """``dJ/dA(w) = int dJ/dE(t) cos(phi(w) - w (t - t_c)) dt`` (density over frequency)."""
    return spectral_gradients(field, temporal_grad, time_grid, t_center)[1]
