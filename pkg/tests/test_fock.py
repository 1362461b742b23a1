import numpy as np
import pytest

from qlink.fock import FockRegister, Mode


def dense(op):
    return op.toarray()


@pytest.fixture
def mixed():
    return FockRegister([Mode("a", True), Mode("b", False, 3), Mode("c", True), Mode("d", True)])


def test_occupation_table_is_c_ordered(mixed):
    occ = mixed.occupations
    assert occ.shape == (mixed.dim, 4)
    assert tuple(occ[1]) == (0, 0, 0, 1)
    assert tuple(occ[-1]) == (1, 2, 1, 1)


def test_fermions_anticommute(mixed):
    names = ["a", "c", "d"]
    one = np.eye(mixed.dim)
    for p in names:
        for q in names:
            cp, cq = dense(mixed.annihilate(p)), dense(mixed.annihilate(q))
            assert np.allclose(cp @ cq.conj().T + cq.conj().T @ cp, one * (p == q))
            assert np.allclose(cp @ cq + cq @ cp, 0)


def test_truncated_boson_ladder(mixed):
    b = dense(mixed.annihilate("b"))
    n = dense(mixed.number("b"))
    assert np.allclose(b.conj().T @ b, n)
    # [b, b^dagger] = 1 except on the top level, where truncation bites
    comm = b @ b.conj().T - b.conj().T @ b
    top = mixed.occupations[:, 1] == 2
    assert np.allclose(np.diag(comm)[~top], 1)
    assert np.allclose(np.diag(comm)[top], -2)


def test_boson_commutes_with_fermions(mixed):
    b = dense(mixed.annihilate("b"))
    for f in ("a", "c"):
        c = dense(mixed.annihilate(f))
        assert np.allclose(b @ c - c @ b, 0)


def test_parity_anticommutes_with_fermion(mixed):
    P = dense(mixed.parity())
    c = dense(mixed.annihilate("c"))
    assert np.allclose(P @ c + c @ P, 0)


def test_create_is_adjoint(mixed):
    for name in ("a", "b", "d"):
        assert np.allclose(dense(mixed.create(name)), dense(mixed.annihilate(name)).conj().T)


def test_bad_modes():
    with pytest.raises(ValueError):
        Mode("f", True, 3)
    with pytest.raises(ValueError):
        FockRegister([Mode("x", True), Mode("x", True)])
