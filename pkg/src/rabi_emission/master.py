"""Dissipative generators: generalized (non-secular) dressed master equation,
dressed master equation with post-trace RWA, and the standard quantum-optics
master equation.

Superoperators act on column-stacked density matrices:
``vec(rho) = rho.flatten(order="F")`` and ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .dressed import EigenSystem, TransitionTable
from .errors import DimensionMismatchError
from .hilbert import HilbertSpace, annihilation, pauli
from .models import ModelParams

SMALL_RATIO = 1e-8


@dataclass(frozen=True)
class BathSpec:
    """Bare loss rates and effective reservoir temperatures ``k_B T / omega``."""

    kappa: float
    gamma: float
    T_c: float = 0.0
    T_q: float = 0.0

    def __post_init__(self):
        if not (self.kappa > 0 and self.gamma > 0):
            raise ValueError("kappa and gamma must be positive")
        if self.T_c < 0 or self.T_q < 0:
            raise ValueError("temperatures must be non-negative")

    @classmethod
    def relative(cls, params: ModelParams, kappa_over_wq: float, gamma_over_wq: float,
                 T_c: float = 0.0, T_q: float = 0.0) -> "BathSpec":
        return cls(kappa_over_wq * params.omega_q, gamma_over_wq * params.omega_q, T_c, T_q)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).flatten(order="F")


def unvec(v: np.ndarray, n: Optional[int] = None) -> np.ndarray:
    n = n or int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape((n, n), order="F")


@dataclass(frozen=True)
class Superoperator:
    """Generator matrix acting on ``vec(rho)`` for ``n x n`` density matrices."""

    matrix: Union[np.ndarray, sp.spmatrix]
    n: int
    basis: str = "dressed"

    @property
    def M(self) -> int:
        return self.n

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.n)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if self.n != other.n:
            raise DimensionMismatchError(f"{self.n} != {other.n}")
        return Superoperator(self.matrix + other.matrix, self.n, self.basis)


def _kron(a, b, sparse):
    return sp.kron(a, b, format="csr") if sparse else np.kron(a, b)


def _eye(n, sparse):
    return sp.identity(n, dtype=complex, format="csr") if sparse else np.eye(n, dtype=complex)


def spre(a, sparse=False):
    """Superoperator of ``rho -> a rho``."""
    return _kron(_eye(a.shape[0], sparse), a, sparse)


def spost(b, sparse=False):
    """Superoperator of ``rho -> rho b``."""
    return _kron(b.T, _eye(b.shape[0], sparse), sparse)


def sprepost(a, b, sparse=False):
    """Superoperator of ``rho -> a rho b``."""
    return _kron(b.T, a, sparse)


def commutator_superop(h, sparse=False):
    """Superoperator of ``rho -> -i [h, rho]``."""
    return -1j * (spre(h, sparse) - spost(h, sparse))


def dissipator_generic(O, sparse: bool = False) -> Superoperator:
    """``D[O] rho = (2 O rho O^dag - rho O^dag O - O^dag O rho) / 2``."""
    if sparse:
        O = sp.csr_matrix(O, dtype=complex)
    else:
        O = np.asarray(O, dtype=complex)
    Od = O.conj().T
    OdO = Od @ O
    mat = sprepost(O, Od, sparse) - 0.5 * spost(OdO, sparse) - 0.5 * spre(OdO, sparse)
    return Superoperator(mat, O.shape[0], basis="bare")


def thermal_occupation(omega_kj, omega_ref: float, T: float):
    """Bose occupation ``1 / (exp[omega_kj / (omega_ref T)] - 1)``; zero when ``T = 0``."""
    w = np.asarray(omega_kj, dtype=float)
    if np.any(w <= 0):
        raise ValueError("thermal occupation needs omega_kj > 0")
    if omega_ref <= 0 or T < 0:
        raise ValueError("omega_ref must be positive and T non-negative")
    if T == 0:
        out = np.zeros_like(w)
    else:
        out = 1.0 / np.expm1(w / (omega_ref * T))
    return float(out) if out.ndim == 0 else out


def _rate_factors(w: np.ndarray, omega_ref: float, rate: float, T: float):
    """Per-unit-matrix-element emission and absorption rates at frequencies ``w >= 0``.

    Emission is ``rate (w/omega_ref)(n+1)``, absorption ``rate (w/omega_ref) n``.
    The absorption product is evaluated as ``rate T u/(e^u - 1)`` with
    ``u = w/(omega_ref T)``, which stays finite as ``w -> 0``.
    """
    ratio = w / omega_ref
    if T == 0:
        return rate * ratio, np.zeros_like(w)
    u = ratio / T
    small = u < SMALL_RATIO
    safe_u = np.where(small, 1.0, u)
    bose_factor = np.where(small, 1.0 - 0.5 * u, safe_u / np.expm1(safe_u))
    absorption = rate * T * bose_factor
    return rate * ratio + absorption, absorption


@dataclass(frozen=True)
class RateTable:
    """Dressed-basis transition rates for the cavity (c) and qubit (q) reservoirs.

    Matrices are indexed ``[k, j]`` with ``k > j`` (transition ``k -> j``);
    ``amp_c[j, k] = x_jk`` and ``amp_q[j, k] = s_jk`` keep the complex matrix
    elements needed by the non-secular cross terms.  ``emission_*`` and
    ``absorption_*`` are per unit squared matrix element.
    """

    Gamma_c: np.ndarray
    Gamma_q: np.ndarray
    n_c: np.ndarray
    n_q: np.ndarray
    Gamma_n_c: np.ndarray
    Gamma_n_q: np.ndarray
    amp_c: np.ndarray
    amp_q: np.ndarray
    emission_c: np.ndarray
    absorption_c: np.ndarray
    emission_q: np.ndarray
    absorption_q: np.ndarray

    @property
    def M(self) -> int:
        return self.Gamma_c.shape[0]


def decay_rates(table: TransitionTable, bath: BathSpec, params: Optional[ModelParams] = None) -> RateTable:
    """Ohmic, gauge-invariant decay rates ``Gamma^c_kj`` and ``Gamma^q_kj``."""
    params = params or table.params
    M = table.M
    w = np.tril(table.omega, k=-1).clip(min=0.0)  # w[k, j] = omega_k - omega_j for k > j
    lower = np.tril(np.ones((M, M), dtype=bool), k=-1)

    out = {}
    for tag, elems, rate, omega_ref, T in (
        ("c", table.x, bath.kappa, params.omega_c, bath.T_c),
        ("q", table.s, bath.gamma, params.omega_q, bath.T_q),
    ):
        amp = np.triu(elems, k=1)
        mag2 = np.abs(amp.T) ** 2  # [k, j]
        em, ab = _rate_factors(w, omega_ref, rate, T)
        em, ab = em * lower, ab * lower
        gamma = rate * (w / omega_ref) * mag2
        n = np.zeros_like(w)
        positive = lower & (w > 0)
        if T > 0:
            n[positive] = thermal_occupation(w[positive], omega_ref, T)
        out[tag] = dict(Gamma=gamma, n=n, Gn=ab * mag2, amp=amp, em=em, ab=ab)

    return RateTable(
        Gamma_c=out["c"]["Gamma"], Gamma_q=out["q"]["Gamma"],
        n_c=out["c"]["n"], n_q=out["q"]["n"],
        Gamma_n_c=out["c"]["Gn"], Gamma_n_q=out["q"]["Gn"],
        amp_c=out["c"]["amp"], amp_q=out["q"]["amp"],
        emission_c=out["c"]["em"], absorption_c=out["c"]["ab"],
        emission_q=out["q"]["em"], absorption_q=out["q"]["ab"],
    )


def _hamiltonian_part(eig: EigenSystem, H: Optional[np.ndarray]) -> np.ndarray:
    if H is None:
        h = np.diag(eig.energies).astype(complex)
    else:
        H = np.asarray(H)
        if H.shape == (eig.M, eig.M):
            h = H
        elif H.shape == (eig.dim, eig.dim):
            h = eig.project(H)
        else:
            raise DimensionMismatchError(f"Hamiltonian shape {H.shape} matches neither M nor dim")
    return commutator_superop(h)


def _check_sizes(eig: EigenSystem, rates: RateTable):
    if eig.M != rates.M:
        raise DimensionMismatchError(f"eigen system has {eig.M} levels, rate table {rates.M}")


def _redfield_bath(amp, em, ab):
    """Non-secular dissipator for one reservoir from lowering amplitudes and rate factors."""
    X = amp
    Xd = X.conj().T
    X_em = em.T * X
    X_ab = ab.T * X
    mat = (sprepost(X_em, Xd) + sprepost(X, X_em.conj().T)
           - spre(Xd @ X_em) - spost(X_em.conj().T @ X)
           + sprepost(X_ab.conj().T, X) + sprepost(Xd, X_ab)
           - spre(X @ X_ab.conj().T) - spost(X_ab @ Xd))
    return 0.5 * mat


def liouvillian_gme(eig: EigenSystem, rates: RateTable, H: Optional[np.ndarray] = None) -> Superoperator:
    """Generalized master equation generator on the lowest ``M`` dressed levels.

    Keeps every cross term between pairs of transitions (no secular
    approximation) and no Lamb shift.  ``H`` defaults to the diagonal of the
    dressed energies; a full-space or ``M x M`` Hamiltonian is also accepted.
    """
    _check_sizes(eig, rates)
    mat = _hamiltonian_part(eig, H)
    mat = mat + _redfield_bath(rates.amp_c, rates.emission_c, rates.absorption_c)
    mat = mat + _redfield_bath(rates.amp_q, rates.emission_q, rates.absorption_q)
    return Superoperator(mat, eig.M, basis="dressed")


def _rate_equation_superop(down: np.ndarray, up: np.ndarray) -> np.ndarray:
    """Sum of ``D[|j><k|]`` terms from rate matrices ``down[k, j]`` (k -> j) and ``up[k, j]`` (j -> k)."""
    M = down.shape[0]
    # transfer[dst, src]
    transfer = down.T + up
    np.fill_diagonal(transfer, 0.0)
    out_rate = transfer.sum(axis=0)
    mat = np.zeros((M * M, M * M), dtype=complex)
    diag_idx = np.arange(M) * (M + 1)
    mat[np.ix_(diag_idx, diag_idx)] += transfer
    decay = -0.5 * (out_rate[:, None] + out_rate[None, :])
    mat[np.arange(M * M), np.arange(M * M)] += vec(decay)
    return mat


def liouvillian_dressed_rwa(eig: EigenSystem, rates: RateTable, H: Optional[np.ndarray] = None) -> Superoperator:
    """Dressed master equation with the post-trace (secular) RWA."""
    _check_sizes(eig, rates)
    mag_c = np.abs(rates.amp_c.T) ** 2
    mag_q = np.abs(rates.amp_q.T) ** 2
    down = rates.emission_c * mag_c + rates.emission_q * mag_q
    up = rates.absorption_c * mag_c + rates.absorption_q * mag_q
    mat = _hamiltonian_part(eig, H) + _rate_equation_superop(down, up)
    return Superoperator(mat, eig.M, basis="dressed")


def bare_occupations(bath: BathSpec):
    """Reservoir occupations at the bare frequencies (``n = 1/(e^{1/T} - 1)``)."""
    n_c = 0.0 if bath.T_c == 0 else 1.0 / np.expm1(1.0 / bath.T_c)
    n_q = 0.0 if bath.T_q == 0 else 1.0 / np.expm1(1.0 / bath.T_q)
    return n_c, n_q


def liouvillian_standard(H, bath: BathSpec, space: Optional[HilbertSpace] = None,
                         sparse: bool = True) -> Superoperator:
    """Standard quantum-optics master equation on the bare product basis.

    ``-i[H, rho] + kappa(1+n_c) D[a] + kappa n_c D[a^dag] + gamma(1+n_q) D[sigma_-]
    + gamma n_q D[sigma_+]`` with occupations at the bare frequencies.  ``H``
    is usually the JC Hamiltonian but any Hamiltonian on ``space`` is accepted.
    """
    H = np.asarray(H)
    space = space or HilbertSpace.for_dim(H.shape[0])
    if space.dim != H.shape[0]:
        raise DimensionMismatchError(f"space dim {space.dim} != Hamiltonian dim {H.shape[0]}")
    n_c, n_q = bare_occupations(bath)
    a = annihilation(space)
    sm = pauli(space, "lowering")
    hmat = sp.csr_matrix(H) if sparse else H
    mat = commutator_superop(hmat, sparse)
    for coeff, op in (
        (bath.kappa * (1 + n_c), a),
        (bath.kappa * n_c, a.conj().T),
        (bath.gamma * (1 + n_q), sm),
        (bath.gamma * n_q, sm.conj().T),
    ):
        if coeff:
            mat = mat + coeff * dissipator_generic(op, sparse).matrix
    return Superoperator(sp.csr_matrix(mat) if sparse else mat, space.dim, basis="bare")
