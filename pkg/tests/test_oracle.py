import numpy as np
import pytest

from conftest import get_chain
from qlink.model import u1_model, u2_model
from qlink.oracle import (OracleSizeError, chain_gates, dense_hamiltonian, embed,
                          enumerate_constrained, exact_propagate, full_reduced_hamiltonian,
                          ground_state, restrict)
from qlink.reduction import ReducedBasis

GOLDEN_U1_L4 = -1.5245986103819373


def test_known_counts():
    assert len(enumerate_constrained(ReducedBasis(u1_model(1, 4)))) == 13
    assert len(enumerate_constrained(ReducedBasis(u2_model(1, 3)))) == 16
    rb = ReducedBasis(u1_model(2, 2))
    assert len(enumerate_constrained(rb, 1)) == rb.d(1)


def test_configurations_satisfy_constraints(chain):
    enum = enumerate_constrained(chain.basis)
    for cfg in enum.configs:
        for x in range(1, chain.L):
            assert chain.n_plus(x)[cfg[x - 1]] + chain.n_minus(x + 1)[cfg[x]] == chain.nbar
    assert [tuple(c) for c in enum.configs] == sorted(tuple(c) for c in enum.configs)


def test_both_directions_same_set(chain):
    a = enumerate_constrained(chain.basis, direction="left")
    b = enumerate_constrained(chain.basis, direction="right")
    assert set(a.index) == set(b.index)
    with pytest.raises(ValueError):
        enumerate_constrained(chain.basis, direction="up")


def test_size_guard():
    with pytest.raises(OracleSizeError):
        enumerate_constrained(ReducedBasis(u2_model(2, 2)), 12, max_states=1000)


def test_zero_hopping_is_diagonal():
    chain = get_chain("u1_n1", 4, J=0.0)
    H = dense_hamiltonian(enumerate_constrained(chain.basis), chain.gates)
    assert np.array_equal(H, np.diag(np.diag(H)))


def test_golden_ground_energy_two_enumeration_orders():
    chain = get_chain("u1_n1", 4, J=1.0, mass=0.5, g2=1.0)
    energies = []
    for direction in ("left", "right"):
        enum = enumerate_constrained(chain.basis, direction=direction)
        energies.append(ground_state(dense_hamiltonian(enum, chain.gates))[0])
    assert energies[0] == pytest.approx(energies[1], abs=1e-13)
    assert energies[0] == pytest.approx(GOLDEN_U1_L4, abs=1e-12)


def test_spectrum_independent_of_mass_grouping(chain):
    enum = enumerate_constrained(chain.basis)
    a = np.linalg.eigvalsh(dense_hamiltonian(enum, chain_gates(chain.basis, "symmetric")))
    b = np.linalg.eigvalsh(dense_hamiltonian(enum, chain_gates(chain.basis, "right")))
    assert np.abs(a - b).max() < 1e-12


def test_restriction_of_full_reduced_hamiltonian(chain):
    enum = enumerate_constrained(chain.basis)
    H = dense_hamiltonian(enum, chain.gates)
    idx = enum.flat_indices()
    full = full_reduced_hamiltonian(chain.basis, chain.gates)
    assert np.abs(full[np.ix_(idx, idx)] - H).max() < 1e-12
    assert np.abs(H - H.conj().T).max() < 1e-12


def test_gate_shape_checks():
    chain = get_chain("u1_n1")
    enum = enumerate_constrained(chain.basis)
    with pytest.raises(ValueError):
        dense_hamiltonian(enum, chain.gates[:2])
    with pytest.raises(ValueError):
        dense_hamiltonian(enum, [np.eye(4)] * 3)


def test_propagation_identity_and_unitarity():
    chain = get_chain("u1_n1")
    enum = enumerate_constrained(chain.basis)
    H = dense_hamiltonian(enum, chain.gates)
    rng = np.random.default_rng(3)
    psi = rng.standard_normal(len(enum)) + 1j * rng.standard_normal(len(enum))
    psi /= np.linalg.norm(psi)
    assert np.allclose(exact_propagate(H, psi, 0.0), psi, atol=1e-14)
    assert abs(np.linalg.norm(exact_propagate(H, psi, 2.7)) - 1) < 1e-12
    e0, v0 = ground_state(H)
    out = exact_propagate(H, psi, 40.0, "imaginary")
    assert abs(abs(np.vdot(v0, out / np.linalg.norm(out))) - 1) < 1e-10
    with pytest.raises(ValueError):
        exact_propagate(H, psi, 1.0, "complex")


def test_embed_restrict_roundtrip():
    chain = get_chain("u2_n1")
    enum = enumerate_constrained(chain.basis)
    v = np.arange(len(enum)) + 1.0
    full = embed(enum, v)
    assert full.shape == tuple(chain.dims)
    assert np.array_equal(restrict(enum, full), v)
    assert np.count_nonzero(full) == len(enum)
