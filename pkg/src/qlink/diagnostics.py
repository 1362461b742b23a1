"""Invariant checks and kernel cost reports shared by the CLI and the test-suite."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .automata import build_automaton, dimension_table
from .chain import QLinkChain
from .links import assemble_global_mpo, contract_mpo, mpo_core, operator_schmidt_rank
from .model import GaugeModelSpec, Group
from .mpdo.kernels import apply_gate_blocked, apply_gate_dense, blocked_bound, dense_formula
from .mpdo.state import random_state
from .mpdo.trotter import build_projected_gate
from .oracle import enumerate_constrained, full_reduced_hamiltonian

STRUCT_TOL = 1e-12
KERNEL_TOL = 1e-10


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _max(a) -> float:
    return float(np.abs(np.asarray(a)).max(initial=0.0))


def expected_chi(spec: GaugeModelSpec) -> int | None:
    if spec.group is Group.U1:
        return 4 * spec.nbar + 1
    return {1: 8, 2: 14}.get(spec.nbar)


def global_projector(chain: QLinkChain, corrupt_v: bool = False) -> np.ndarray:
    mpo = chain.mpo
    if corrupt_v:
        mpo = assemble_global_mpo(chain.basis)
        mpo.V[0] = mpo.V[0] + 1
        mpo.cores[0] = mpo_core(mpo.V[0], None, chain.d(1))
    return contract_mpo(mpo).astype(float)


def structural_checks(chain: QLinkChain, gamma: complex = -0.7j, corrupt_v: bool = False,
                      tol: float = STRUCT_TOL) -> list[Check]:
    out = []
    iso, proj, gauss = 0.0, 0.0, 0.0
    ops = chain.basis.ops
    for x in (1, 2):
        vb = chain.basis[x]
        iso = max(iso, _max(vb.A @ vb.A.conj().T - np.eye(vb.d)))
        proj = max(proj, _max(vb.A.conj().T @ vb.A - vb.projector))
        for k, g in enumerate(ops.gauss_generators(x)):
            red = chain.basis.reduce_local(x, g)
            gauss = max(gauss, _max(red))
    out.append(Check("isometry A A^dagger = 1", iso <= tol, iso, tol))
    out.append(Check("A^dagger A = P", proj <= tol, proj, tol))
    out.append(Check("reduced Gauss generators vanish", gauss <= tol, gauss, tol))

    Qbar = global_projector(chain, corrupt_v)
    idem = _max(Qbar @ Qbar - Qbar)
    out.append(Check("projector idempotence", idem <= tol, idem, tol))
    herm = _max(Qbar - Qbar.T)
    out.append(Check("projector hermiticity", herm <= tol, herm, tol))
    H = full_reduced_hamiltonian(chain.basis, chain.gates)
    comm = _max(H @ Qbar - Qbar @ H)
    out.append(Check("[H_r, Q_bar_r] = 0", comm <= tol, comm, tol))

    worst_exp, worst_rank = 0.0, True
    chis = []
    for x in range(1, chain.L):
        Q = chain.link_projector(x)
        e = build_projected_gate(chain.h(x), np.eye(len(Q)), gamma)
        worst_exp = max(worst_exp, _max(Q @ e - e @ Q))
        worst_rank &= operator_schmidt_rank(Q, chain.d(x), chain.d(x + 1)) == chain.nbar + 1
        chis.append(chain.sector(x).chi)
    out.append(Check("[Q_r, exp(gamma h_r)] = 0", worst_exp <= tol, worst_exp, tol))
    out.append(Check("link projector Schmidt rank = nbar + 1", bool(worst_rank),
                     float(chain.nbar + 1), 0.0))
    exp_chi = expected_chi(chain.spec)
    ok = exp_chi is None or all(c == exp_chi for c in chis)
    out.append(Check("support dimension chi", ok, float(chis[0]), 0.0,
                     f"chi per link {chis}, expected {exp_chi}"))
    return out


def counting_checks(chain: QLinkChain, l_max: int = 6) -> list[Check]:
    table = dimension_table(build_automaton(chain.basis), l_max)
    out = []
    for L in range(1, l_max + 1):
        n_enum = len(enumerate_constrained(chain.basis, L))
        auto = table.total(L)
        if L >= 2:
            sub = QLinkChain(chain.spec.with_length(L))
            tr = int(contract_mpo(sub.mpo, diagonal_only=True).sum())
        else:
            tr = chain.d(1)
        ok = n_enum == auto == tr
        out.append(Check(f"counting L={L}", ok, float(n_enum), 0.0,
                         f"enumeration {n_enum}, automaton {auto}, trace {tr}"))
    return out


def kernel_equivalence(chain: QLinkChain, n_states: int = 50, m: int = 4, b: int = 2,
                       seed: int = 0, gamma: complex = -0.3j, link: int | None = None,
                       tol: float = KERNEL_TOL) -> Check:
    """Largest entrywise gap between blocked and dense two-site updates on random states."""
    x = link if link is not None else max(1, chain.L // 2)
    g = build_projected_gate(chain.h(x), chain.link_projector(x), gamma, chain.sector(x),
                             outer=(chain.n_minus(x), chain.n_plus(x + 1)))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        st = random_state(chain, m, b, seed=rng.integers(2 ** 63), m_max=10 ** 6)
        st.move_center(x)
        a, d = st.copy(), st.copy()
        ra = apply_gate_blocked(a, g, x, keep_theta=True)
        rd = apply_gate_dense(d, g.full, x)
        worst = max(worst, _max(ra.theta - rd.theta))
    return Check(f"blocked vs dense kernel ({n_states} states)", worst <= tol, worst, tol)


@dataclass
class CostReport:
    model: str
    nbar: int
    d: int
    chi: int
    b: int
    m: int
    blocked_contraction: int
    blocked_bound: int
    dense_contraction: int
    dense_formula: int
    blocked_svd: int
    dense_svd: int

    @property
    def svd_ratio(self) -> float:
        return self.blocked_svd / self.dense_svd

    def as_dict(self) -> dict:
        d = asdict(self)
        d["svd_ratio"] = self.svd_ratio
        return d


def kernel_costs(chain: QLinkChain, m: int = 8, b: int = 2, seed: int = 0,
                 name: str = "") -> CostReport:
    """Op counts of one gate on the middle link of a random state with uniform bonds ``m``."""
    x = max(2, chain.L // 2) if chain.L > 3 else 1
    g = build_projected_gate(chain.h(x), chain.link_projector(x), -0.1j, chain.sector(x))
    if chain.L < 4:
        raise ValueError("cost report needs L >= 4 so both outer bonds have dimension m")
    st = random_state(chain, m, b, seed=seed, m_max=10 ** 6)
    a, d = st.copy(), st.copy()
    ra = apply_gate_blocked(a, g, x)
    rd = apply_gate_dense(d, g.full, x, keep_theta=False)
    dl = chain.d(x)
    chi = chain.sector(x).chi
    return CostReport(name, chain.nbar, dl, chi, b, m,
                      ra.ops.contraction + ra.ops.gate, blocked_bound(chi, b, m),
                      rd.ops.contraction + rd.ops.gate, dense_formula(dl, b, m),
                      ra.ops.svd, rd.ops.svd)
