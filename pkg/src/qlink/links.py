"""Link constraint in the reduced basis.

On each link ``(x, x+1)`` the reduced projector is diagonal,
``Q_r(j, j') = [n_+(x, j) + n_-(x+1, j') == nbar]``. It factorizes through the
intermediate charge ``q = n_+(x, j)`` as ``sum_q V[x][j, q] Z[x+1][q, j']``,
which gives an MPO for the product of all link projectors with bond
dimension ``nbar + 1``. Everything here is stored as integer 0/1 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .reduction import ReducedBasis


def v_tensor(basis: ReducedBasis, x: int) -> np.ndarray:
    """``V[j, q] = [n_+(x, j) == q]``, shape ``(d_x, nbar+1)``."""
    n_plus = basis[x].n_plus
    return (n_plus[:, None] == np.arange(basis.nbar + 1)[None, :]).astype(np.int64)


def z_tensor(basis: ReducedBasis, x: int) -> np.ndarray:
    """``Z[q, j] = [nbar - q == n_-(x, j)]``, shape ``(nbar+1, d_x)``."""
    n_minus = basis[x].n_minus
    q = np.arange(basis.nbar + 1)
    return (basis.nbar - q[:, None] == n_minus[None, :]).astype(np.int64)


def build_link_projector(basis: ReducedBasis, x: int):
    """Reduced link projector on ``(x, x+1)`` as a dense ``d² x d²`` 0/1 matrix, with V and Z."""
    basis.spec.check_link(x)
    V, Z = v_tensor(basis, x), z_tensor(basis, x + 1)
    mask = V @ Z
    return np.diag(mask.reshape(-1)), V, Z


@dataclass(frozen=True)
class ChargeSectorMap:
    """Admissible ``(j, j', q)`` triplets of one link, 0-based labels, ordered by ``(q, j, j')``."""

    link: int
    nbar: int
    d_left: int
    d_right: int
    triplets: np.ndarray
    left_members: dict = field(default_factory=dict)
    right_members: dict = field(default_factory=dict)

    @property
    def chi(self) -> int:
        return len(self.triplets)

    @property
    def charges(self) -> list[int]:
        return sorted(q for q in self.left_members if self.xi(q) > 0)

    def xi_left(self, q: int) -> int:
        return len(self.left_members.get(q, ()))

    def xi_right(self, q: int) -> int:
        return len(self.right_members.get(q, ()))

    def xi(self, q: int) -> int:
        """Number of triplets with intermediate charge ``q``."""
        return self.xi_left(q) * self.xi_right(q)

    @property
    def pair_index(self) -> np.ndarray:
        """Flattened pair label ``j * d_right + j'`` of every triplet."""
        return self.triplets[:, 0] * self.d_right + self.triplets[:, 1]

    def labels(self):
        """Triplets with 1-based state labels, as written in the literature."""
        return [(int(j) + 1, int(k) + 1, int(q)) for j, k, q in self.triplets]


def charge_sector_map(basis: ReducedBasis, x: int) -> ChargeSectorMap:
    basis.spec.check_link(x)
    nbar = basis.nbar
    n_plus, n_minus = basis[x].n_plus, basis[x + 1].n_minus
    left = {q: np.flatnonzero(n_plus == q) for q in range(nbar + 1)}
    right = {q: np.flatnonzero(n_minus == nbar - q) for q in range(nbar + 1)}
    rows = [(j, k, q) for q in range(nbar + 1) for j in left[q] for k in right[q]]
    trip = np.array(rows, dtype=np.int64).reshape(-1, 3)
    return ChargeSectorMap(x, nbar, basis.d(x), basis.d(x + 1), trip, left, right)


@dataclass
class LinkMPO:
    """MPO of the chain-wide reduced link projector.

    ``cores[x-1]`` has shape ``(m_left, m_right, d, d)``; the outer bonds of
    the first and last core have dimension 1 (open ends carry no constraint).
    """

    nbar: int
    V: list
    Z: list
    cores: list

    @property
    def L(self) -> int:
        return len(self.cores)

    @property
    def bond_dimension(self) -> int:
        return self.nbar + 1


def mpo_core(V: np.ndarray | None, Z: np.ndarray | None, d: int) -> np.ndarray:
    """``F[ql, qr, j, j'] = δ_{jj'} Z[ql, j] V[j, qr]``; ``None`` marks a free open end."""
    zl = np.ones((1, d), dtype=np.int64) if Z is None else Z
    vr = np.ones((d, 1), dtype=np.int64) if V is None else V
    diag = zl[:, None, :] * vr.T[None, :, :]
    core = np.zeros(diag.shape + (d,), dtype=np.int64)
    idx = np.arange(d)
    core[:, :, idx, idx] = diag
    return core


def assemble_global_mpo(basis: ReducedBasis) -> LinkMPO:
    L = basis.L
    V = [v_tensor(basis, x) for x in range(1, L + 1)]
    Z = [z_tensor(basis, x) for x in range(1, L + 1)]
    cores = []
    for x in range(1, L + 1):
        cores.append(mpo_core(V[x - 1] if x < L else None, Z[x - 1] if x > 1 else None, basis.d(x)))
    return LinkMPO(basis.nbar, V, Z, cores)


def microscopic_mpo_core(basis: ReducedBasis, x: int) -> np.ndarray:
    """MPO core built from the unreduced rishon projectors and the isometry.

    ``F[ql, qr, j, j'] = <j| C[ql] B[qr] |j'>`` with ``B[qr] = [n_+ == qr]`` and
    ``C[ql] = [nbar - ql == n_-]`` diagonal on the product basis. Used to check
    the canonical core, which must coincide with it.
    """
    vb = basis[x]
    occ_minus = np.rint(basis.ops.n_minus.diagonal().real).astype(int)
    occ_plus = np.rint(basis.ops.n_plus.diagonal().real).astype(int)
    q = np.arange(basis.nbar + 1)
    B = (occ_plus[None, :] == q[:, None]).astype(float)
    C = (basis.nbar - q[:, None] == occ_minus[None, :]).astype(float)
    if x == 1:
        C = np.ones((1, vb.D))
    if x == basis.L:
        B = np.ones((1, vb.D))
    A = vb.A
    weights = C[:, None, :] * B[None, :, :]
    return np.einsum("js,abs,ks->abjk", A, weights, A.conj())


def contract_mpo(mpo: LinkMPO, diagonal_only: bool = False) -> np.ndarray:
    """Dense operator (or its diagonal) represented by the MPO, as exact integers."""
    cores = mpo.cores
    if diagonal_only:
        acc = np.einsum("abjj->bj", cores[0]).T  # (d, m)
        for core in cores[1:]:
            diag = np.einsum("abjj->abj", core)
            acc = np.einsum("ia,abj->ijb", acc, diag).reshape(-1, diag.shape[1])
        return acc[:, 0]
    acc = cores[0][0].transpose(1, 2, 0)  # (d, d, m)
    for core in cores[1:]:
        acc = np.einsum("ika,abjl->ijklb", acc, core)
        s = acc.shape
        acc = acc.reshape(s[0] * s[1], s[2] * s[3], s[4])
    return acc[:, :, 0]


def product_of_link_projectors(basis: ReducedBasis) -> np.ndarray:
    """Diagonal of ``prod_x Q_r(x, x+1)`` evaluated configuration by configuration."""
    dims = basis.dims
    configs = np.indices(dims).reshape(len(dims), -1).T
    ok = np.ones(len(configs), dtype=bool)
    for x in range(1, basis.L):
        ok &= basis[x].n_plus[configs[:, x - 1]] + basis[x + 1].n_minus[configs[:, x]] == basis.nbar
    return ok.astype(np.int64)


def operator_schmidt_rank(Q: np.ndarray, d_left: int, d_right: int, tol: float = 1e-10) -> int:
    """Rank of a two-site operator across the left/right cut."""
    T = Q.reshape(d_left, d_right, d_left, d_right).transpose(0, 2, 1, 3)
    s = np.linalg.svd(T.reshape(d_left * d_left, d_right * d_right), compute_uv=False)
    return int(np.sum(s > tol * max(s[0], 1.0)))
