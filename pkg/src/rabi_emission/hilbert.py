"""Truncated qubit x Fock space and its elementary operators.

Basis ordering is qubit-major: index ``i = q * (n_max + 1) + n`` with
``q = 0`` for the ground state ``|g>`` and ``q = 1`` for ``|e>``.  All
operators are dense complex ``numpy`` arrays and are returned read-only so
they can be shared safely between workers.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidTruncationError

GROUND, EXCITED = 0, 1

_QUBIT_OPS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
    # sigma_+ = |e><g|, sigma_- = |g><e|; rows/cols ordered (g, e)
    "raising": np.array([[0, 0], [1, 0]], dtype=complex),
    "lowering": np.array([[0, 1], [0, 0]], dtype=complex),
}


@dataclass(frozen=True)
class HilbertSpace:
    """Composite space of one qubit and a cavity mode truncated at ``n_max`` photons."""

    n_max: int

    def __post_init__(self):
        if isinstance(self.n_max, bool) or int(self.n_max) != self.n_max:
            raise InvalidTruncationError(f"n_max must be an integer, got {self.n_max!r}")
        if self.n_max < 1:
            raise InvalidTruncationError(f"n_max must be >= 1, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * self.n_fock

    def index(self, q: int, n: int) -> int:
        if q not in (GROUND, EXCITED) or not 0 <= n <= self.n_max:
            raise IndexError(f"no basis state (q={q}, n={n}) for n_max={self.n_max}")
        return q * self.n_fock + n

    def label(self, i: int) -> tuple[int, int]:
        """Inverse of :meth:`index`."""
        if not 0 <= i < self.dim:
            raise IndexError(i)
        return divmod(i, self.n_fock)

    def basis(self, q: int, n: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(q, n)] = 1.0
        return v

    @classmethod
    def for_dim(cls, dim: int) -> "HilbertSpace":
        if dim % 2:
            raise InvalidTruncationError(f"dimension {dim} is not 2*(n_max+1)")
        return cls(dim // 2 - 1)


def build_space(n_max: int) -> HilbertSpace:
    return HilbertSpace(n_max)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=64)
def _annihilation(n_max: int) -> np.ndarray:
    fock = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    return _frozen(np.kron(np.eye(2), fock))


def annihilation(space: HilbertSpace) -> np.ndarray:
    """Photon annihilation operator, identity on the qubit."""
    return _annihilation(space.n_max)


def creation(space: HilbertSpace) -> np.ndarray:
    return _frozen(annihilation(space).conj().T.copy())


def number(space: HilbertSpace) -> np.ndarray:
    a = annihilation(space)
    return _frozen(a.conj().T @ a)


@lru_cache(maxsize=64)
def _pauli(n_max: int, axis: str) -> np.ndarray:
    return _frozen(np.kron(_QUBIT_OPS[axis], np.eye(n_max + 1)))


def pauli(space: HilbertSpace, axis: str) -> np.ndarray:
    """Qubit operator tensored with the Fock identity.

    ``axis`` is one of ``"x"``, ``"y"``, ``"z"``, ``"raising"`` or
    ``"lowering"``.  Conventions: ``sigma_z|e> = +|e>`` and
    ``sigma_+ = |e><g|``.
    """
    if axis not in _QUBIT_OPS:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return _pauli(space.n_max, axis)


def parity_diagonal(space: HilbertSpace) -> np.ndarray:
    """Diagonal of the parity operator in the product basis (entries +-1)."""
    photon_sign = (-1.0) ** np.arange(space.n_fock)
    return np.concatenate([-photon_sign, photon_sign])


def parity_operator(space: HilbertSpace) -> np.ndarray:
    """``sigma_z (x) (-1)^{a^dag a}``; squares to the identity."""
    return _frozen(np.diag(parity_diagonal(space)).astype(complex))


def identity(space: HilbertSpace) -> np.ndarray:
    return _frozen(np.eye(space.dim, dtype=complex))
