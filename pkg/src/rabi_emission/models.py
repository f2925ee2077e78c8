"""Quantum Rabi Hamiltonians in the Coulomb and dipole gauges, plus the JC model."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hilbert import HilbertSpace, annihilation, pauli

COULOMB, DIPOLE = "coulomb", "dipole"
GAUGES = (COULOMB, DIPOLE)

# JC coupling is (prefactor * eta * omega_c)
JC_COUPLING_PREFACTOR = 0.5


@dataclass(frozen=True)
class ModelParams:
    """Cavity/qubit frequencies (hbar = 1) and normalized coupling ``eta = g / omega_c``."""

    omega_c: float = 1.0
    omega_q: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if not self.omega_c > 0 or not self.omega_q > 0:
            raise ValueError("omega_c and omega_q must be positive")
        if not self.eta >= 0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")

    @property
    def delta(self) -> float:
        """Detuning ``(omega_c - omega_q) / omega_q``."""
        return (self.omega_c - self.omega_q) / self.omega_q

    @property
    def g(self) -> float:
        return self.eta * self.omega_c

    @classmethod
    def from_detuning(cls, eta: float, delta: float = 0.0, omega_q: float = 1.0) -> "ModelParams":
        return cls(omega_c=omega_q * (1.0 + delta), omega_q=omega_q, eta=eta)

    def with_eta(self, eta: float) -> "ModelParams":
        return ModelParams(self.omega_c, self.omega_q, eta)


@lru_cache(maxsize=32)
def _field_coordinate_eig(n_max: int):
    """Eigen-decomposition of the truncated ``a + a^dag`` on the Fock factor."""
    off = np.sqrt(np.arange(1, n_max + 1, dtype=float))
    x = np.diag(off, 1) + np.diag(off, -1)
    return np.linalg.eigh(x)


def _fock_function(n_max: int, f) -> np.ndarray:
    xi, w = _field_coordinate_eig(n_max)
    return (w * f(xi)) @ w.T


def gauge_unitary(space: HilbertSpace, params: ModelParams) -> np.ndarray:
    """``U = exp[i eta (a + a^dag) sigma_x]`` evaluated in the truncated space."""
    eta = params.eta
    cos = _fock_function(space.n_max, lambda xi: np.cos(eta * xi))
    sin = _fock_function(space.n_max, lambda xi: np.sin(eta * xi))
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return np.kron(np.eye(2), cos) + 1j * np.kron(sx, sin)


def gauge_rotation(space: HilbertSpace, params: ModelParams) -> np.ndarray:
    """``R = U^dag``; maps Coulomb-gauge states to dipole-gauge states."""
    return gauge_unitary(space, params).conj().T


def hamiltonian_photon(space: HilbertSpace, params: ModelParams) -> np.ndarray:
    a = annihilation(space)
    return params.omega_c * (a.conj().T @ a)


def hamiltonian_qubit(space: HilbertSpace, params: ModelParams) -> np.ndarray:
    return 0.5 * params.omega_q * pauli(space, "z")


def hamiltonian_coulomb(space: HilbertSpace, params: ModelParams) -> np.ndarray:
    """Rabi Hamiltonian in the Coulomb gauge.

    ``omega_c a^dag a + (omega_q/2){sigma_z cos[2 eta x] + sigma_y sin[2 eta x]}``
    with ``x = a + a^dag``; cos/sin are matrix functions of the truncated ``x``
    so the result equals ``U H_q U^dag + H_ph`` to rounding error.
    """
    eta = params.eta
    cos = _fock_function(space.n_max, lambda xi: np.cos(2 * eta * xi))
    sin = _fock_function(space.n_max, lambda xi: np.sin(2 * eta * xi))
    sz = np.array([[-1, 0], [0, 1]], dtype=complex)
    sy = np.array([[0, 1j], [-1j, 0]], dtype=complex)
    qubit = 0.5 * params.omega_q * (np.kron(sz, cos) + np.kron(sy, sin))
    return hamiltonian_photon(space, params) + qubit


def hamiltonian_dipole(space: HilbertSpace, params: ModelParams) -> np.ndarray:
    """Rabi Hamiltonian in the dipole gauge, keeping the constant ``omega_c eta^2``."""
    a = annihilation(space)
    ad = a.conj().T
    sx = pauli(space, "x")
    h = hamiltonian_photon(space, params) + hamiltonian_qubit(space, params)
    h = h - 1j * params.g * ((a - ad) @ sx)
    h = h + params.omega_c * params.eta**2 * np.eye(space.dim)
    return h


def hamiltonian(space: HilbertSpace, params: ModelParams, gauge: str = COULOMB) -> np.ndarray:
    if gauge == COULOMB:
        return hamiltonian_coulomb(space, params)
    if gauge == DIPOLE:
        return hamiltonian_dipole(space, params)
    raise ValueError(f"unknown gauge {gauge!r}")


def hamiltonian_jc(space: HilbertSpace, params: ModelParams,
                   coupling_prefactor: float = JC_COUPLING_PREFACTOR) -> np.ndarray:
    """Jaynes-Cummings Hamiltonian with coupling ``coupling_prefactor * eta * omega_c``."""
    a = annihilation(space)
    sp = pauli(space, "raising")
    sm = pauli(space, "lowering")
    coupling = coupling_prefactor * params.g
    h = hamiltonian_photon(space, params) + hamiltonian_qubit(space, params)
    return h + coupling * (a @ sp + a.conj().T @ sm)


def dressed_photon_operator(space: HilbertSpace, params: ModelParams) -> np.ndarray:
    """Dipole-gauge photon annihilation operator ``a' = a + i eta sigma_x``."""
    return annihilation(space) + 1j * params.eta * pauli(space, "x")


def photon_operator(space: HilbertSpace, params: ModelParams, gauge: str = COULOMB) -> np.ndarray:
    """Operator that annihilates field quanta in the given gauge."""
    if gauge == DIPOLE:
        return dressed_photon_operator(space, params)
    return annihilation(space).copy()
