"""Dressed eigenstates, JC-style labels, transition tables and detection operators."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, LabelingError, NotHermitianError, UnknownChannelError
from .hilbert import HilbertSpace, annihilation, parity_diagonal, pauli
from .models import COULOMB, ModelParams, photon_operator

CHANNELS = ("cavity", "qubit", "cavity_wrong")
WEIGHTINGS = ("linear", "flat")

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Lowest ``M`` eigenpairs of a Hamiltonian on a truncated space.

    ``states`` holds the eigenvectors as columns, ordered by ascending energy.
    """

    energies: np.ndarray
    states: np.ndarray
    parities: np.ndarray
    labels: Optional[tuple] = None
    gauge: Optional[str] = None

    @property
    def M(self) -> int:
        return len(self.energies)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def index_of(self, label: str) -> int:
        if self.labels is None:
            raise LabelingError("eigen system has no labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label!r} not among the lowest {self.M} levels") from None

    def project(self, op: np.ndarray) -> np.ndarray:
        """Matrix elements ``<j|op|k>`` between retained levels."""
        v = self.states
        return v.conj().T @ op @ v


def _check_hermitian(h: np.ndarray, tol: float = 1e-10):
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitianError(f"operator must be square, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    err = float(np.max(np.abs(h - h.conj().T)))
    if err > tol * scale:
        raise NotHermitianError(f"operator is not Hermitian (max|H - H^dag| = {err:.3e})")


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # Largest-magnitude component real positive.  Ties within 1e-9 go to the lowest index.
    mags = np.abs(vecs)
    pivot = np.argmax(mags >= mags.max(axis=0) - 1e-9, axis=0)
    ph = vecs[pivot, np.arange(vecs.shape[1])]
    return vecs * (np.abs(ph) / ph)[None, :]


def _split_degenerate(energies, vecs, tiebreak, tol):
    """Rotate numerically degenerate same-parity clusters onto eigenvectors of ``tiebreak``."""
    scale = max(1.0, float(np.max(np.abs(energies))))
    start = 0
    n = len(energies)
    while start < n:
        stop = start + 1
        while stop < n and energies[stop] - energies[stop - 1] < tol * scale:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            small = block.conj().T @ tiebreak @ block
            _, rot = np.linalg.eigh(0.5 * (small + small.conj().T))
            vecs[:, start:stop] = block @ rot
            energies[start:stop] = energies[start:stop].mean()
        start = stop
    return energies, vecs


def diagonalize(H: np.ndarray, M: int, space: Optional[HilbertSpace] = None, *,
                gauge: Optional[str] = None, degeneracy_tol: float = DEGENERACY_TOL,
                label: bool = True) -> EigenSystem:
    """Return the lowest ``M`` eigenpairs of the Hermitian ``H``.

    When ``H`` commutes with the parity operator the two parity blocks are
    diagonalized separately, so every returned state is an exact parity
    eigenvector even inside quasi-degenerate doublets.  Degenerate
    same-parity clusters are resolved with ``sigma_z`` as a tie-breaker.
    """
    H = np.asarray(H)
    _check_hermitian(H)
    dim = H.shape[0]
    if not 1 <= M <= dim:
        raise DimensionMismatchError(f"M={M} outside 1..{dim}")
    space = space or HilbertSpace.for_dim(dim)
    if space.dim != dim:
        raise DimensionMismatchError(f"space dim {space.dim} != operator dim {dim}")

    pdiag = parity_diagonal(space)
    mixing = np.max(np.abs(H[np.not_equal.outer(pdiag, pdiag)]), initial=0.0)
    sz = pauli(space, "z")
    if mixing <= 1e-12 * max(1.0, float(np.max(np.abs(H)))):
        energies, vecs, parities = [], [], []
        for sign in (-1.0, 1.0):
            idx = np.flatnonzero(pdiag == sign)
            e, w = np.linalg.eigh(H[np.ix_(idx, idx)])
            full = np.zeros((dim, len(idx)), dtype=complex)
            full[idx, :] = w
            # resolve degeneracies inside the block before merging sectors
            e, full = _split_degenerate(e, full, sz, degeneracy_tol)
            energies.append(e)
            vecs.append(full)
            parities.append(np.full(len(idx), sign))
        energies = np.concatenate(energies)
        vecs = np.concatenate(vecs, axis=1)
        parities = np.concatenate(parities)
        order = np.argsort(energies, kind="stable")
        energies, vecs, parities = energies[order], vecs[:, order], parities[order]
    else:
        energies, vecs = np.linalg.eigh(H)
        energies, vecs = _split_degenerate(energies, vecs.astype(complex), sz, degeneracy_tol)
        pexp = np.einsum("ij,i,ij->j", vecs.conj(), pdiag, vecs).real
        parities = np.where(pexp >= 0, 1.0, -1.0)

    vecs = _fix_phase(vecs[:, :M])
    eig = EigenSystem(energies=energies[:M].copy(), states=vecs, parities=parities[:M].copy(),
                      gauge=gauge)
    if label:
        eig = label_states(eig)
    return eig


def parity_residuals(eig: EigenSystem) -> np.ndarray:
    """``||P|j> - p_j|j>||`` for each retained level."""
    p = parity_diagonal(HilbertSpace.for_dim(eig.dim))
    return np.linalg.norm(p[:, None] * eig.states - eig.parities[None, :] * eig.states, axis=0)


def label_states(eig: EigenSystem, parity_tol: float = 1e-8) -> EigenSystem:
    """Attach tilde-JC labels: ``"0"`` for the ground state, ``"1-"``, ``"1+"``, ``"2-"``, ...

    Levels sharing the ground-state parity carry even ``n``, the others odd
    ``n``; within each parity sector levels are numbered by energy.  Levels of
    one sector never cross each other, so labels are continuous in ``eta``.
    """
    if eig.M == 0:
        return eig
    resid = parity_residuals(eig)
    bad = np.flatnonzero(resid > parity_tol)
    if bad.size:
        raise LabelingError(f"levels {bad.tolist()} are not parity eigenstates")
    ground_parity = eig.parities[0]
    labels = ["0"]
    counts = {True: 0, False: 0}
    for p in eig.parities[1:]:
        same = bool(p == ground_parity)
        i = counts[same]
        counts[same] += 1
        n = (2 if same else 1) + 2 * (i // 2)
        labels.append(f"{n}{'-' if i % 2 == 0 else '+'}")
    return replace(eig, labels=tuple(labels))


def excitation_number(label: str) -> int:
    return int(label.rstrip("+-"))


@dataclass(frozen=True)
class TransitionTable:
    """Transition frequencies and field/qubit matrix elements between retained levels.

    ``omega[k, j] = omega_k - omega_j``; ``x[j, k] = <j|(a + a^dag)|k>``;
    ``s[j, k] = <j|sigma_x|k>``; ``v[j, k] = <j|(A - A^dag)|k>`` where ``A`` is
    the gauge-appropriate photon operator (``a`` or ``a'``).  ``v_bare`` always
    uses the untransformed ``a``.
    """

    omega: np.ndarray
    x: np.ndarray
    s: np.ndarray
    v: np.ndarray
    v_bare: np.ndarray
    params: ModelParams
    gauge: str = COULOMB

    @property
    def M(self) -> int:
        return self.omega.shape[0]

    def downward_frequencies(self) -> np.ndarray:
        """Matrix ``w[j, k] = max(omega_k - omega_j, 0)`` for ``k > j``, zero elsewhere."""
        w = np.triu(self.omega.T, k=1)
        return np.clip(w, 0.0, None)


def transition_table(eig: EigenSystem, space: HilbertSpace, params: ModelParams) -> TransitionTable:
    if eig.dim != space.dim:
        raise DimensionMismatchError(f"eigenvectors have dim {eig.dim}, space has {space.dim}")
    gauge = eig.gauge or COULOMB
    a = annihilation(space)
    x_op = a + a.conj().T
    A = photon_operator(space, params, gauge)
    E = eig.energies
    return TransitionTable(
        omega=E[:, None] - E[None, :],
        x=eig.project(x_op),
        s=eig.project(pauli(space, "x")),
        v=eig.project(A - A.conj().T),
        v_bare=eig.project(a - a.conj().T),
        params=params,
        gauge=gauge,
    )


@dataclass(frozen=True)
class FieldOperatorSpec:
    """Detection channel with its frequency weighting ``alpha(omega)``.

    ``weighting="linear"`` gives ``alpha = omega_kj / omega_ref``; ``"flat"``
    gives ``alpha = 1`` (the operators used in the frequency-replaced spectra).
    ``omega_ref=None`` means omega_c for the cavity and omega_q for the qubit.
    """

    channel: str = "cavity"
    weighting: str = "linear"
    omega_ref: Optional[float] = None

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise UnknownChannelError(f"unknown channel {self.channel!r}; expected one of {CHANNELS}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.omega_ref is not None and not self.omega_ref > 0:
            raise ValueError("omega_ref must be positive")

    def reference(self, params: ModelParams) -> float:
        if self.omega_ref is not None:
            return self.omega_ref
        return params.omega_q if self.channel == "qubit" else params.omega_c


def _weights(table: TransitionTable, spec: FieldOperatorSpec) -> np.ndarray:
    w = table.downward_frequencies()
    if spec.weighting == "flat":
        return np.triu(np.ones_like(w), k=1)
    return w / spec.reference(table.params)


def field_operator_plus(table: TransitionTable, spec: FieldOperatorSpec) -> np.ndarray:
    """Positive-frequency detection operator ``i sum_{k>j} alpha(omega_kj) c_jk |j><k|``.

    As a matrix it is strictly upper triangular: it only maps a level to
    lower-energy levels.  ``c`` is ``x`` (cavity) or ``s`` (qubit); the
    ``cavity_wrong`` channel uses ``<j|(a - a^dag)|k>`` with the untransformed
    ``a`` and carries no extra weighting.
    """
    if spec.channel == "cavity":
        return 1j * _weights(table, spec) * table.x
    if spec.channel == "qubit":
        return 1j * _weights(table, spec) * table.s
    if spec.channel == "cavity_wrong":
        return 1j * np.triu(table.v_bare, k=1)
    raise UnknownChannelError(spec.channel)


def wrong_field_operator_plus(space: HilbertSpace, eig_dipole: EigenSystem,
                              spec: Optional[FieldOperatorSpec] = None) -> np.ndarray:
    """Field operator built from dipole-gauge eigenstates with the untransformed ``a``.

    This is the gauge-inconsistent operator that produces incorrect photon
    rates in the dipole gauge; it is kept for comparison only.  ``spec`` is
    accepted for interface symmetry and is not used.
    """
    a = annihilation(space)
    v = eig_dipole.project(a - a.conj().T)
    return 1j * np.triu(v, k=1)


def field_operator_minus(op_plus: np.ndarray) -> np.ndarray:
    return op_plus.conj().T


def align_phases(reference: EigenSystem, other: EigenSystem, rotation: np.ndarray) -> EigenSystem:
    """Rephase ``other`` so that ``other.states[:, j]`` matches ``rotation @ reference.states[:, j]``.

    Used to compare dressed-basis quantities across gauges, where eigenvector
    phases are otherwise arbitrary.
    """
    overlap = np.einsum("ij,ij->j", other.states.conj(), rotation @ reference.states)
    ph = np.where(np.abs(overlap) > 0, overlap / np.abs(overlap), 1.0)
    return replace(other, states=other.states * ph[None, :])
