import numpy as np
from hypothesis import given, strategies as st

from conftest import get_chain
from qlink.automata import build_automaton, dimension_table
from qlink.links import contract_mpo
from qlink.mpdo.kernels import apply_gate_blocked, apply_gate_dense, select_values
from qlink.mpdo.state import from_dense, random_state
from qlink.mpdo.trotter import ODD, EVEN, build_projected_gate, trotter_schedule

models = st.sampled_from(["u1_n1", "u1_n2", "u2_n1", "u2_n2"])
seeds = st.integers(0, 2 ** 32 - 1)


@given(models, seeds, st.floats(-2, 2), st.sampled_from([-1j, -0.5]))
def test_blocked_equals_dense(name, seed, scale, unit):
    chain = get_chain(name)
    x = 1 + seed % (chain.L - 1)
    g = build_projected_gate(chain.h(x), chain.link_projector(x), scale * unit, chain.sector(x))
    s = random_state(chain, 3, 2, seed=seed, m_max=10 ** 6)
    s.move_center(x)
    a, d = s.copy(), s.copy()
    ra = apply_gate_blocked(a, g, x, keep_theta=True)
    rd = apply_gate_dense(d, g.full, x)
    assert np.abs(ra.theta - rd.theta).max() < 1e-10
    assert np.abs(a.to_dense() @ a.to_dense().conj().T
                  - d.to_dense() @ d.to_dense().conj().T).max() < 1e-10


@given(st.lists(st.floats(0, 10), min_size=1, max_size=30), st.integers(1, 40),
       st.sampled_from([0.0, 1e-12, 1e-6, 1e-2]), seeds)
def test_select_invariants(vals, m_max, eps, seed):
    v = np.array(vals)
    q = np.random.default_rng(seed).integers(0, 3, len(v))
    kept, disc, _ = select_values(v, q, m_max, eps)
    assert len(kept) <= m_max
    assert len(set(kept.tolist())) == len(kept)
    total = float(np.sum(v ** 2))
    assert abs(total - float(np.sum(v[kept] ** 2)) - disc * total) <= 1e-9 * max(total, 1)
    if len(kept):
        dropped = np.setdiff1d(np.arange(len(v)), kept)
        assert all(v[dropped] <= v[kept].min() + 1e-12 * v.max()) if len(dropped) else True


@given(models, st.sampled_from(["link", "raw"]), st.integers(0, 9))
def test_automaton_counts(name, frame, l_max):
    chain = get_chain(name)
    graph = build_automaton(chain.basis, frame)
    table = dimension_table(graph, l_max)
    d = max(chain.d(1), chain.d(2))
    for ell in range(1, l_max + 1):
        assert table.total(ell) <= table.total(ell - 1) * d
        assert table.total(ell) >= table.total(ell - 1)


@given(models, seeds)
def test_from_dense_round_trip(name, seed):
    chain = get_chain(name)
    src = random_state(chain, 3, 2, seed=seed)
    X = src.to_dense()
    Y = from_dense(chain, X, baths=[t.shape[2] for t in src.tensors]).to_dense()
    assert np.abs(X @ X.conj().T - Y @ Y.conj().T).max() < 1e-10


@given(st.sampled_from([1, 2, 4]), st.complex_numbers(max_magnitude=3))
def test_schedule_weights_sum_to_one(p, gamma):
    sched = trotter_schedule(p, gamma)
    for parity in (ODD, EVEN):
        assert abs(sum(w for par, w in sched.layers if par == parity) - 1) < 1e-12


@given(models, st.integers(2, 4))
def test_global_projector_idempotent(name, L):
    Q = contract_mpo(get_chain(name, L).mpo).astype(float)
    assert np.abs(Q @ Q - Q).max() < 1e-12
    assert np.abs(Q - Q.T).max() == 0
