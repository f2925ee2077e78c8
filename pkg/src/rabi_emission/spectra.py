"""Steady states, photon-flux rates and emission spectra."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dressed import (EigenSystem, FieldOperatorSpec, TransitionTable, diagonalize,
                      field_operator_minus, field_operator_plus, transition_table)
from .errors import (DimensionMismatchError, NonUniqueSteadyStateError, NormalizationError,
                     PositivityError, RatioUndefinedError, SolverError)
from .hilbert import HilbertSpace
from .master import BathSpec, Superoperator, decay_rates, liouvillian_gme, unvec, vec
from .models import ModelParams, hamiltonian

HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-8
UNIQUENESS_FACTOR = 1e3
# eigenvalue-based uniqueness check is skipped above this superoperator size
UNIQUENESS_MAX_DIM = 1700
REFINEMENT_STEPS = 3


def _trace_row(n: int) -> np.ndarray:
    return vec(np.eye(n)).astype(complex)


def check_unique_zero_mode(L: Superoperator, factor: float = UNIQUENESS_FACTOR) -> tuple[float, float]:
    """Return the two smallest ``|Re lambda|`` of ``L`` and raise if they are not well separated."""
    ev = sla.eigvals(L.dense())
    re = np.sort(np.abs(ev.real))
    smallest, second = re[0], re[1]
    if second <= factor * max(smallest, np.finfo(float).tiny):
        raise NonUniqueSteadyStateError(
            f"zero mode not isolated: |Re l0|={smallest:.3e}, |Re l1|={second:.3e}")
    return float(smallest), float(second)


def _steady_dense(A: np.ndarray, n: int) -> np.ndarray:
    # least squares on [L; tr] x = [0; 1] by QR, refined with an extended-precision residual
    N = A.shape[1]
    stacked = np.vstack([A, _trace_row(n)[None, :]])
    b = np.zeros(stacked.shape[0], dtype=complex)
    b[-1] = 1.0
    Q, R = sla.qr(stacked, mode="economic")

    def solve(rhs):
        return sla.solve_triangular(R, Q.conj().T @ rhs)

    x = solve(b)
    ext = stacked.astype(np.clongdouble)
    for _ in range(REFINEMENT_STEPS):
        r = (b.astype(np.clongdouble) - ext @ x.astype(np.clongdouble)).astype(complex)
        if not np.any(r):
            break
        x = x + solve(r)
    assert x.shape == (N,)
    return x


def _steady_sparse(A: sp.spmatrix, n: int) -> np.ndarray:
    # replace the first population row with the trace constraint
    A = sp.lil_matrix(A, dtype=complex)
    A[0, :] = _trace_row(n)[None, :]
    b = np.zeros(A.shape[0], dtype=complex)
    b[0] = 1.0
    return spla.spsolve(sp.csc_matrix(A), b)


def validate_density_matrix(rho: np.ndarray, positivity_tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Hermitize and normalize ``rho``; raise when it is not a physical state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"density matrix must be square, got {rho.shape}")
    tr = np.trace(rho)
    if abs(tr) == 0:
        raise PositivityError("density matrix has zero trace")
    rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -positivity_tol:
        raise PositivityError(f"minimum eigenvalue {lam_min:.3e} below -{positivity_tol:g}")
    return rho


def steady_state(L: Superoperator, check_unique: Optional[bool] = None,
                 positivity_tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Normalized zero mode of ``L``.

    Parameters
    ----------
    L : Superoperator
        Generator acting on column-stacked ``n x n`` matrices.
    check_unique : bool, optional
        Verify the zero mode is isolated via the Liouvillian spectrum.
        ``None`` does so only for generators small enough to diagonalize cheaply.
    positivity_tol : float
        Largest tolerated negative eigenvalue of the result.

    Returns
    -------
    ndarray
        Hermitian, unit-trace density matrix.
    """
    n = L.n
    if check_unique is None:
        check_unique = L.matrix.shape[0] <= UNIQUENESS_MAX_DIM
    if check_unique:
        check_unique_zero_mode(L)
    if L.is_sparse:
        x = _steady_sparse(L.matrix, n)
    else:
        x = _steady_dense(np.asarray(L.matrix), n)
    return validate_density_matrix(unvec(x, n), positivity_tol)


def emission_rate(rho: np.ndarray, O_plus: np.ndarray) -> float:
    """Photon flux ``Tr[O^- O^+ rho]``."""
    rho = np.asarray(rho)
    if rho.shape != O_plus.shape:
        raise DimensionMismatchError(f"rho {rho.shape} vs operator {O_plus.shape}")
    O_minus = field_operator_minus(O_plus)
    return float(np.real(np.trace(O_minus @ O_plus @ rho)))


def two_level_ratio(eig: EigenSystem, table: TransitionTable, params: Optional[ModelParams] = None) -> float:
    """Approximate ``W_c / W_q`` when only the lowest transition is populated."""
    params = params or table.params
    if eig.M < 2:
        raise ValueError("need at least two levels")
    i0, i1 = eig.index_of("0"), eig.index_of("1-")
    s = abs(table.s[i0, i1])
    if s < 1e-14:
        raise RatioUndefinedError(f"|s_01| = {s:.3e} is too small")
    x = abs(table.x[i0, i1])
    return float((params.omega_q / params.omega_c) ** 2 * x**2 / s**2)


def reference_rate_eta0(bath: BathSpec, params: ModelParams, n_max: int = 3) -> float:
    """Qubit emission rate of the uncoupled system, used to normalize all rates."""
    if bath.T_q == 0:
        raise NormalizationError("qubit reference rate vanishes at T_q = 0")
    p0 = params.with_eta(0.0)
    space = HilbertSpace(n_max)
    eig = diagonalize(hamiltonian(space, p0), space.dim, space)
    table = transition_table(eig, space, p0)
    L = liouvillian_gme(eig, decay_rates(table, bath, p0))
    rho = steady_state(L, check_unique=False)
    w = emission_rate(rho, field_operator_plus(table, FieldOperatorSpec("qubit")))
    if w <= 0:
        raise NormalizationError(f"non-positive reference rate {w:.3e}")
    return w


@dataclass(frozen=True)
class SpectrumResult:
    """Emission spectral density on an ascending frequency grid."""

    omegas: np.ndarray
    values: np.ndarray
    channel: str = "cavity"
    normalization: str = "raw"

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        if om.ndim != 1 or om.size == 0 or np.any(np.diff(om) <= 0):
            raise ValueError("omega grid must be non-empty and strictly ascending")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def normalized(self) -> "SpectrumResult":
        peak = np.max(self.values)
        if not peak > 0:
            raise ValueError("spectrum has no positive values to normalize")
        return replace(self, values=self.values / peak, normalization="max1")


def _resolvent_schur(A, rhs, omegas):
    T, Z = sla.schur(A, output="complex")
    y = Z.conj().T @ rhs
    diag = np.diag(T)
    out = []
    for w in omegas:
        d = 1j * w - diag
        if np.min(np.abs(d)) < 1e-14 * max(1.0, np.max(np.abs(diag))):
            raise SolverError(f"resolvent singular at omega={w}", omega=w)
        shifted = -T
        shifted[np.diag_indices_from(T)] = d
        out.append(sla.solve_triangular(shifted, y))
    return Z @ np.array(out).T


def _resolvent_direct(A, rhs, omegas):
    N = A.shape[0]
    out = []
    for w in omegas:
        try:
            if sp.issparse(A):
                sol = spla.splu(sp.csc_matrix(1j * w * sp.identity(N) - A)).solve(rhs)
            else:
                lu = sla.lu_factor(1j * w * np.eye(N) - A, check_finite=False)
                sol = sla.lu_solve(lu, rhs)
        except (RuntimeError, sla.LinAlgError) as exc:
            raise SolverError(f"resolvent singular at omega={w}", omega=w) from exc
        if not np.all(np.isfinite(sol)):
            raise SolverError(f"resolvent singular at omega={w}", omega=w)
        out.append(sol)
    return np.array(out).T


def _resolvent_eig(A, rhs, omegas):
    lam, V = sla.eig(A)
    c = sla.solve(V, rhs)
    denom = 1j * np.asarray(omegas)[None, :] - lam[:, None]
    if np.min(np.abs(denom)) == 0:
        raise SolverError("resolvent singular on grid")
    return V @ (c[:, None] / denom)


_METHODS = {"schur": _resolvent_schur, "solve": _resolvent_direct, "eig": _resolvent_eig}


def emission_spectrum(L: Superoperator, rho_ss: np.ndarray, O_minus: np.ndarray, O_plus: np.ndarray,
                      omega_ref: float, grid: Sequence[float], *, prefactor: bool = True,
                      channel: str = "cavity", method: str = "schur") -> SpectrumResult:
    """Stationary emission spectrum from the regression theorem.

    ``S(w) = (w/omega_ref)^2 Re Tr[O^- (iw - L)^{-1}(O^+ rho_ss)]``; with
    ``prefactor=False`` the ``(w/omega_ref)^2`` factor is dropped, which is the
    form to use with frequency-weighted operators.

    ``method`` selects how the resolvent is applied: ``"schur"`` reduces ``L``
    once to triangular form and back-substitutes per frequency, ``"solve"``
    factorizes ``iw - L`` at every frequency and ``"eig"`` uses the
    eigen-decomposition (only for cross-checks).
    """
    omegas = np.asarray(grid, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0 or np.any(omegas <= 0) or np.any(np.diff(omegas) <= 0):
        raise ValueError("frequency grid must be strictly positive and ascending")
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}")
    n = L.n
    if O_plus.shape != (n, n) or O_minus.shape != (n, n) or np.shape(rho_ss) != (n, n):
        raise DimensionMismatchError("operators, state and generator disagree in size")
    A = L.matrix
    if method != "solve" and sp.issparse(A):
        A = A.toarray()
    rhs = vec(O_plus @ rho_ss)
    X = _METHODS[method](A, rhs, omegas)
    # Tr[O^- unvec(x)] = vec(O^-^T) . x
    values = np.real(vec(O_minus.T) @ X)
    if prefactor:
        values = values * (omegas / omega_ref) ** 2
    return SpectrumResult(omegas, values, channel=channel, normalization="raw")


def spectrum_map(spectra: Sequence[SpectrumResult]) -> list[SpectrumResult]:
    """Max-normalize each row of a sweep so its brightest point is 1."""
    return [s.normalized() for s in spectra]
