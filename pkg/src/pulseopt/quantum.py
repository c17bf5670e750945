"""Finite-level quantum systems driven by a classical field.

The Hamiltonian is ``H(t) = H0 - mu E(t)`` with ``H0 = diag(energies)``
(rad/fs) and a real symmetric dipole matrix ``mu`` (a.u.). Fields are in
the internal units of :mod:`pulseopt.units`, so ``mu E`` is in rad/fs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .units import UNITS, TimeGrid, UnitSystem

__all__ = [
    "QuantumSystem",
    "Observable",
    "PropagationResult",
    "basis_state",
    "as_state",
    "propagate",
    "expectation",
    "rb_benchmark_system",
    "RB_ENERGIES_CM",
    "RB_DIPOLES_AU",
]

RB_ENERGIES_CM = (0.0, 12578.95, 12816.55)
# mu_12, mu_13 (mu_23 = 0: the 2-3 transition is dipole forbidden)
RB_DIPOLES_AU = (2.9931, 4.2275)


@dataclass(frozen=True)
class QuantumSystem:
    """N-level system in the eigenbasis of the free Hamiltonian.

    Parameters
    ----------
    energies : array_like, shape (N,)
        Eigenvalues of H0 in rad/fs, sorted non-decreasing.
    dipole : array_like, shape (N, N)
        Real symmetric dipole matrix in a.u.
    """

    energies: np.ndarray
    dipole: np.ndarray

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        mu = np.array(self.dipole, dtype=float)
        if e.ndim != 1 or e.size < 1:
            raise ValueError("energies must be a non-empty vector")
        if mu.shape != (e.size, e.size):
            raise ValueError(f"dipole shape {mu.shape} does not match {e.size} levels")
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(mu))):
            raise ValueError("energies and dipole must be finite")
        if np.any(np.diff(e) < 0):
            raise ValueError("energies must be sorted non-decreasing")
        if not np.allclose(mu, mu.T, rtol=0, atol=1e-12 * max(1.0, np.abs(mu).max())):
            raise ValueError("dipole matrix must be symmetric")
        e.setflags(write=False)
        mu = 0.5 * (mu + mu.T)
        mu.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "dipole", mu)

    @property
    def dim(self) -> int:
        return self.energies.size

    def hamiltonian(self, field_value: float) -> np.ndarray:
        return np.diag(self.energies) - field_value * self.dipole


@dataclass(frozen=True)
class Observable:
    """Hermitian operator whose expectation value at time T is maximized."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("observable must be a square matrix")
        if not np.all(np.isfinite(m)):
            raise ValueError("observable must be finite")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ValueError("observable must be Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def projector(cls, dim: int, level: int) -> "Observable":
        """``|level><level|`` with a 0-based level index."""
        if not 0 <= level < dim:
            raise ValueError(f"level {level} outside 0..{dim - 1}")
        m = np.zeros((dim, dim), dtype=complex)
        m[level, level] = 1.0
        return cls(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def max_value(self) -> float:
        """Largest attainable expectation value (top eigenvalue)."""
        return float(np.linalg.eigvalsh(self.matrix)[-1])

    def diagonal_levels(self):
        """Index of the projected level if this is a basis projector, else None."""
        m = self.matrix
        d = np.real(np.diag(m))
        if np.count_nonzero(m) == 1 and np.count_nonzero(d == 1.0) == 1:
            return int(np.argmax(d))
        return None


def basis_state(dim: int, level: int) -> np.ndarray:
    """Basis vector ``|level>`` (0-based)."""
    if not 0 <= level < dim:
        raise ValueError(f"level {level} outside 0..{dim - 1}")
    psi = np.zeros(dim, dtype=complex)
    psi[level] = 1.0
    return psi


def as_state(psi, dim: int | None = None) -> np.ndarray:
    """Validate a state vector: complex, finite and normalized to 1e-10."""
    v = np.asarray(psi, dtype=complex)
    if v.ndim != 1:
        raise ValueError("state must be a vector")
    if dim is not None and v.size != dim:
        raise ValueError(f"state has {v.size} amplitudes, system has {dim} levels")
    norm = float(np.vdot(v, v).real)
    if not np.isfinite(norm) or abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state is not normalized (norm^2 = {norm})")
    return v


@dataclass(frozen=True)
class PropagationResult:
    """Stored trajectory of a propagation.

    Attributes
    ----------
    times : ndarray, shape (n,)
    unitary_trajectory : ndarray, shape (n, N, N)
        Schrodinger-picture propagator U(t_i), with U(t_0) = I.
    populations : ndarray, shape (n, N)
        ``|<k|U(t_i)|psi0>|^2`` for the initial state used.
    field_samples : ndarray, shape (n,)
    initial : ndarray, shape (N,)
    """

    times: np.ndarray
    unitary_trajectory: np.ndarray
    populations: np.ndarray
    field_samples: np.ndarray
    initial: np.ndarray
    dipole: np.ndarray = field(repr=False)

    @property
    def final_unitary(self) -> np.ndarray:
        return self.unitary_trajectory[-1]

    @property
    def final_state(self) -> np.ndarray:
        return self.unitary_trajectory[-1] @ self.initial

    @property
    def states(self) -> np.ndarray:
        """``U(t_i) psi0`` for every sample, shape (n, N)."""
        return self.unitary_trajectory @ self.initial

    def unitarity_error(self) -> float:
        """``max_i ||U_i^dagger U_i - I||_max``."""
        U = self.unitary_trajectory
        eye = np.eye(U.shape[-1])
        return float(np.max(np.abs(np.conj(np.swapaxes(U, 1, 2)) @ U - eye)))


def _prefix_products(S: np.ndarray) -> np.ndarray:
    """Cumulative products ``C_i = S_i S_{i-1} ... S_0``.

    Blocked scan: sequential products inside blocks of about sqrt(n)
    factors (vectorized across blocks), a short sequential pass over the
    block totals, then one batched product to apply the block offsets.
    """
    n, N, _ = S.shape
    b = max(1, int(math.isqrt(n)))
    m = -(-n // b)
    X = np.empty((m * b, N, N), dtype=S.dtype)
    X[:n] = S
    X[n:] = np.eye(N)
    X = X.reshape(m, b, N, N)
    for k in range(1, b):
        X[:, k] = X[:, k] @ X[:, k - 1]
    offsets = np.empty((m, N, N), dtype=S.dtype)
    offsets[0] = np.eye(N)
    for j in range(1, m):
        offsets[j] = X[j - 1, -1] @ offsets[j - 1]
    X = X @ offsets[:, None]
    return X.reshape(m * b, N, N)[:n]


def propagate(system: QuantumSystem, field_samples, grid: TimeGrid,
              initial=None) -> PropagationResult:
    """Propagate ``U(t)`` under ``H0 - mu E(t)`` on a uniform time grid.

    The field is held constant on the cell of each sample (half cells at
    the two ends, so the cell widths are the trapezoid weights). Within a
    cell the interaction-picture generator is frozen at the sample time
    and exponentiated exactly through one eigendecomposition of ``mu``:

        P_i = exp(i E_i w_i mu_I(t_i)),   mu_I(t) = e^{i H0 t} mu e^{-i H0 t}.

    Every step is exactly unitary, and the derivative of ``U(T)`` with
    respect to ``E_i`` is available in closed form (see
    :func:`pulseopt.gradients.temporal_gradient`).

    Parameters
    ----------
    system : QuantumSystem
    field_samples : array_like, shape (grid.n_points,)
        Field in internal units on the grid nodes.
    grid : TimeGrid
    initial : array_like, optional
        Initial state; defaults to the lowest level.

    Returns
    -------
    PropagationResult
    """
    E = np.asarray(field_samples, dtype=float)
    if E.ndim != 1 or E.size != grid.n_points:
        raise ValueError(
            f"field has {E.size} samples but the time grid has {grid.n_points} points")
    if not np.all(np.isfinite(E)):
        raise ValueError("field samples must be finite")
    dim = system.dim
    psi0 = basis_state(dim, 0) if initial is None else as_state(initial, dim)

    t = grid.points
    w = grid.weights
    lam, V = np.linalg.eigh(system.dipole)
    D = np.exp(1j * np.outer(t, system.energies))          # diag of e^{i H0 t_i}
    A = D[:, :, None] * V[None, :, :]                        # e^{i H0 t} V

    def cell_factor(idx, frac):
        ph = np.exp(1j * (E[idx] * w[idx] * frac)[:, None] * lam[None, :])
        Ai = A[idx]
        return (Ai * ph[:, None, :]) @ np.conj(np.swapaxes(Ai, 1, 2))

    # The first cell lies after t_0 and the last before t_{n-1}; interior
    # cells are split evenly around their sample.
    half = cell_factor(slice(None), 0.5)
    half[0] = cell_factor(slice(0, 1), 1.0)[0]
    steps = np.empty_like(half)
    steps[0] = np.eye(dim)
    steps[1:] = half[1:] @ half[:-1]
    steps[-1] = cell_factor(slice(-1, None), 1.0)[0] @ half[-2]
    UI = _prefix_products(steps)
    U = np.conj(D)[:, :, None] * UI
    pops = np.abs(U @ psi0) ** 2
    U.setflags(write=False)
    pops.setflags(write=False)
    return PropagationResult(times=t, unitary_trajectory=U, populations=pops,
                             field_samples=E.copy(), initial=psi0,
                             dipole=system.dipole)


def expectation(result: PropagationResult, initial, obs: Observable) -> float:
    """``Tr[U(T) |psi0><psi0| U(T)^dagger O]``."""
    U = result.final_unitary
    psi0 = as_state(initial, U.shape[0])
    if obs.dim != U.shape[0]:
        raise ValueError("observable dimension does not match the system")
    psi = U @ psi0
    return float(np.real(np.vdot(psi, obs.matrix @ psi)))


def rb_benchmark_system(units: UnitSystem = UNITS) -> QuantumSystem:
    """Three-level Rb model: 5S (ground), 5P1/2 and 5P3/2 levels."""
    energies = units.wavenumber_to_angular_frequency(np.array(RB_ENERGIES_CM))
    mu12, mu13 = RB_DIPOLES_AU
    dipole = units.dipole_to_internal(np.array([[0.0, mu12, mu13],
                                                [mu12, 0.0, 0.0],
                                                [mu13, 0.0, 0.0]]))
    return QuantumSystem(energies, dipole)
