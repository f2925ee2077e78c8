import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabi_emission.errors import InvalidTruncationError
from rabi_emission.hilbert import (EXCITED, GROUND, HilbertSpace, annihilation, creation, number,
                                   parity_operator, pauli)


@pytest.mark.parametrize("bad", [0, -3, 2.5, True])
def test_invalid_truncation(bad):
    with pytest.raises(InvalidTruncationError):
        HilbertSpace(bad)


@given(st.integers(1, 40), st.data())
def test_index_label_roundtrip(n_max, data):
    s = HilbertSpace(n_max)
    q = data.draw(st.sampled_from([GROUND, EXCITED]))
    n = data.draw(st.integers(0, n_max))
    assert s.label(s.index(q, n)) == (q, n)
    assert s.basis(q, n)[s.index(q, n)] == 1


def test_for_dim():
    assert HilbertSpace.for_dim(22).n_max == 10
    with pytest.raises(InvalidTruncationError):
        HilbertSpace.for_dim(7)


def test_ladder_commutator_below_edge():
    s = HilbertSpace(8)
    a, ad = annihilation(s), creation(s)
    comm = a @ ad - ad @ a
    diag = np.real(np.diag(comm)).reshape(2, -1)
    assert np.allclose(diag[:, :-1], 1.0)
    assert np.allclose(diag[:, -1], -s.n_max)
    assert np.allclose(np.diag(number(s)).real, np.tile(np.arange(9), 2))


def test_pauli_conventions():
    s = HilbertSpace(3)
    sz, sp, sm = pauli(s, "z"), pauli(s, "raising"), pauli(s, "lowering")
    e, g = s.basis(EXCITED, 1), s.basis(GROUND, 1)
    assert np.allclose(sz @ e, e) and np.allclose(sz @ g, -g)
    assert np.allclose(sp @ g, e) and np.allclose(sm @ e, g)
    sx, sy = pauli(s, "x"), pauli(s, "y")
    assert np.allclose(sx @ sy - sy @ sx, 2j * sz)
    with pytest.raises(ValueError):
        pauli(s, "w")


def test_operators_read_only():
    a = annihilation(HilbertSpace(2))
    with pytest.raises(ValueError):
        a[0, 0] = 1.0


def test_parity_involution():
    s = HilbertSpace(5)
    P = parity_operator(s)
    assert np.allclose(P @ P, np.eye(s.dim))
    assert P[s.index(GROUND, 0), s.index(GROUND, 0)] == -1
