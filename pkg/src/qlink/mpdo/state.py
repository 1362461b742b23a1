"""Semi-state ``X`` of a density matrix ``rho = X X^dagger`` as a tensor chain.

``tensors[x-1]`` has indices ``(w_left, j, k, w_right)``: bonds, reduced
physical state and bath. Internal bond ``x`` (between vertices ``x`` and
``x+1``) carries an intermediate charge per index in ``labels[x-1]``; an entry
``X[x][.., j, .., w]`` may be nonzero only if ``n_+(x, j) == labels[x-1][w]``
and ``X[x+1][w, j', ..]`` only if ``n_-(x+1, j') == nbar - labels[x-1][w]``.
Outer bonds have dimension one and carry no label.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..chain import QLinkChain


@dataclass
class MpdoState:
    chain: QLinkChain
    tensors: list
    labels: list
    m_max: int = 256
    eps_svd: float = 1e-12
    b_max: int = 64
    discarded_weight: float = 0.0
    log_norm: float = 0.0
    center: int | None = None
    warnings: list = field(default_factory=list)

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def nbar(self) -> int:
        return self.chain.nbar

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[3] for t in self.tensors[:-1]]

    @property
    def bath_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors]

    def copy(self) -> "MpdoState":
        return MpdoState(self.chain, [t.copy() for t in self.tensors],
                         [lab.copy() for lab in self.labels], self.m_max, self.eps_svd,
                         self.b_max, self.discarded_weight, self.log_norm, self.center,
                         list(self.warnings))

    # ------------------------------------------------------------------ checks
    def charge_violation(self) -> float:
        """Largest entry sitting where the bond labels forbid one."""
        worst = 0.0
        for x in range(1, self.L + 1):
            mask = self._support(x)
            t = self.tensors[x - 1]
            worst = max(worst, float(np.abs(t[~mask]).max(initial=0.0)))
        return worst

    def _support(self, x: int) -> np.ndarray:
        t = self.tensors[x - 1]
        ok = np.ones(t.shape, dtype=bool)
        if x > 1:
            lab = self.labels[x - 2]
            ok &= (self.chain.n_minus(x)[None, :] == self.nbar - lab[:, None])[:, :, None, None]
        if x < self.L:
            lab = self.labels[x - 1]
            ok &= (self.chain.n_plus(x)[:, None] == lab[None, :])[None, :, None, :]
        return ok

    # ------------------------------------------------------------- dense views
    def to_dense(self) -> np.ndarray:
        """``X`` as a matrix: rows are physical configurations, columns bath ones (C order)."""
        acc = self.tensors[0][0]  # (d, b, w)
        dims, baths = [acc.shape[0]], [acc.shape[1]]
        acc = acc.reshape(-1, acc.shape[-1])
        for t in self.tensors[1:]:
            acc = acc @ t.reshape(t.shape[0], -1)
            dims.append(t.shape[1])
            baths.append(t.shape[2])
            acc = acc.reshape(-1, t.shape[3])
        acc = acc.reshape([v for pair in zip(dims, baths) for v in pair])
        L = len(dims)
        acc = acc.transpose(list(range(0, 2 * L, 2)) + list(range(1, 2 * L, 2)))
        return acc.reshape(int(np.prod(dims)), int(np.prod(baths)))

    def density_matrix(self) -> np.ndarray:
        X = self.to_dense()
        return X @ X.conj().T

    # -------------------------------------------------------- gauge of the chain
    def _qr_right(self, x: int):
        """Left-orthonormalize vertex ``x`` block by block; push ``R`` into ``x+1``."""
        t, nxt = self.tensors[x - 1], self.tensors[x]
        lab = self.labels[x - 1]
        n_plus = self.chain.n_plus(x)
        wl, d, b, _ = t.shape
        new_t, new_n, new_lab = [], [], []
        for q in np.unique(lab):
            w_q = np.flatnonzero(lab == q)
            j_q = np.flatnonzero(n_plus == q)
            if len(j_q) == 0:
                continue
            mat = t[:, j_q][:, :, :, w_q].reshape(wl * len(j_q) * b, len(w_q))
            Qm, R = np.linalg.qr(mat)
            r = Qm.shape[1]
            blk = np.zeros((wl, d, b, r), dtype=complex)
            blk[:, j_q] = Qm.reshape(wl, len(j_q), b, r)
            new_t.append(blk)
            new_n.append(np.tensordot(R, nxt[w_q], axes=(1, 0)))
            new_lab.append(np.full(r, q))
        self.tensors[x - 1] = np.concatenate(new_t, axis=3)
        self.tensors[x] = np.concatenate(new_n, axis=0)
        self.labels[x - 1] = np.concatenate(new_lab)

    def _qr_left(self, x: int):
        """Right-orthonormalize vertex ``x`` block by block; push ``L`` into ``x-1``."""
        t, prv = self.tensors[x - 1], self.tensors[x - 2]
        lab = self.labels[x - 2]
        n_minus = self.chain.n_minus(x)
        _, d, b, wr = t.shape
        new_t, new_p, new_lab = [], [], []
        for q in np.unique(lab):
            w_q = np.flatnonzero(lab == q)
            j_q = np.flatnonzero(n_minus == self.nbar - q)
            if len(j_q) == 0:
                continue
            mat = t[w_q][:, j_q].reshape(len(w_q), len(j_q) * b * wr)
            Qm, R = np.linalg.qr(mat.T)
            r = Qm.shape[1]
            blk = np.zeros((r, d, b, wr), dtype=complex)
            blk[:, j_q] = Qm.T.reshape(r, len(j_q), b, wr)
            new_t.append(blk)
            new_p.append(np.tensordot(prv[..., w_q], R.T, axes=(3, 0)))
            new_lab.append(np.full(r, q))
        self.tensors[x - 1] = np.concatenate(new_t, axis=0)
        self.tensors[x - 2] = np.concatenate(new_p, axis=3)
        self.labels[x - 2] = np.concatenate(new_lab)

    def canonicalize(self, center: int = 1):
        for x in range(1, center):
            self._qr_right(x)
        for x in range(self.L, center, -1):
            self._qr_left(x)
        self.center = center

    def move_center(self, target: int):
        if self.center is None:
            self.canonicalize(target)
            return
        while self.center < target:
            self._qr_right(self.center)
            self.center += 1
        while self.center > target:
            self._qr_left(self.center)
            self.center -= 1

    def frobenius_norm2(self) -> float:
        """``Tr rho``; cheap when a center exists."""
        if self.center is not None:
            return float(np.vdot(self.tensors[self.center - 1], self.tensors[self.center - 1]).real)
        return float(np.linalg.norm(self.to_dense()) ** 2)

    def scale(self, factor: float):
        x = self.center if self.center is not None else 1
        self.tensors[x - 1] = self.tensors[x - 1] * factor


# ---------------------------------------------------------------- constructors
def _empty(chain: QLinkChain, tensors, labels, **kw) -> MpdoState:
    return MpdoState(chain, [np.asarray(t, dtype=complex) for t in tensors],
                     [np.asarray(lab, dtype=np.int64) for lab in labels], **kw)


def product_state(chain: QLinkChain, config, **kw) -> MpdoState:
    """Pure product state ``|j_1 ... j_L>`` (0-based labels); must satisfy the link constraints."""
    config = list(config)
    if len(config) != chain.L:
        raise ValueError(f"configuration has {len(config)} sites, chain has {chain.L}")
    for x in range(1, chain.L):
        if chain.n_plus(x)[config[x - 1]] + chain.n_minus(x + 1)[config[x]] != chain.nbar:
            raise ValueError(f"configuration violates the link constraint on ({x},{x + 1})")
    tensors, labels = [], []
    for x, j in enumerate(config, start=1):
        t = np.zeros((1, chain.d(x), 1, 1), dtype=complex)
        t[0, j, 0, 0] = 1.0
        tensors.append(t)
        if x < chain.L:
            labels.append([chain.n_plus(x)[j]])
    st = _empty(chain, tensors, labels, **kw)
    st.center = 1
    return st


def _allowed_charges(chain: QLinkChain, x: int) -> list[int]:
    sm = chain.sector(x)
    return [q for q in range(chain.nbar + 1) if sm.xi(q) > 0]


def random_state(chain: QLinkChain, m: int, b: int = 1, seed=None, **kw) -> MpdoState:
    """Random state obeying the link constraints, every internal bond of dimension ``m``.

    Bond indices are spread round-robin over the admissible charges of each link.
    """
    if m < 1 or b < 1:
        raise ValueError("bond and bath dimensions must be positive")
    rng = np.random.default_rng(seed)
    labels = []
    for x in range(1, chain.L):
        qs = _allowed_charges(chain, x)
        labels.append(np.array(sorted(qs[i % len(qs)] for i in range(m)), dtype=np.int64))
    tensors = []
    for x in range(1, chain.L + 1):
        wl = 1 if x == 1 else m
        wr = 1 if x == chain.L else m
        shape = (wl, chain.d(x), b, wr)
        t = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        tensors.append(t)
    st = _empty(chain, tensors, labels, **kw)
    for x in range(1, chain.L + 1):
        st.tensors[x - 1] = np.where(st._support(x), st.tensors[x - 1], 0)
    st.tensors[0] /= np.sqrt(st.frobenius_norm2())
    return st


def infinite_temperature_state(chain: QLinkChain, **kw) -> MpdoState:
    """``X = Q_bar_r`` with bath dimension ``d``, so ``rho`` is the constrained-space identity."""
    tensors, labels = [], []
    for x in range(1, chain.L + 1):
        core = chain.mpo.cores[x - 1].astype(complex)  # (ml, mr, j, k)
        tensors.append(core.transpose(0, 2, 3, 1))
        if x < chain.L:
            labels.append(np.arange(chain.nbar + 1))
    st = _empty(chain, tensors, labels, **kw)
    for x in range(1, chain.L):
        keep = np.flatnonzero(np.abs(st.tensors[x - 1]).sum(axis=(0, 1, 2)) > 0)
        keep = np.intersect1d(keep, np.flatnonzero(np.abs(st.tensors[x]).sum(axis=(1, 2, 3)) > 0))
        st.tensors[x - 1] = st.tensors[x - 1][..., keep]
        st.tensors[x] = st.tensors[x][keep]
        st.labels[x - 1] = st.labels[x - 1][keep]
    return st


def from_dense(chain: QLinkChain, X, tol: float = 1e-14, leak_tol: float = 1e-10,
               **kw) -> MpdoState:
    """Exact chain decomposition of a dense ``X`` (vector or rows x bath matrix).

    Sequential SVDs are done per intermediate charge, so the bonds come out
    labelled. Weight outside the link-constrained support above ``leak_tol``
    raises ``ValueError``.
    """
    dims = chain.dims
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1 or (X.ndim == len(dims) and X.shape == tuple(dims)):
        X = X.reshape(-1, 1)
    n_rows = int(np.prod(dims))
    if X.shape[0] != n_rows:
        raise ValueError(f"expected {n_rows} physical rows, got {X.shape[0]}")
    bath = X.shape[1]
    if bath == 1:
        baths = [1] * chain.L
    else:
        baths = kw.pop("baths", None)
        if baths is None or int(np.prod(baths)) != bath:
            raise ValueError("mixed input needs per-site bath dimensions via baths=")
    L = chain.L
    t = X.reshape(list(dims) + list(baths))
    t = t.transpose([i for pair in zip(range(L), range(L, 2 * L)) for i in pair])
    rest = t.reshape((1,) + t.shape)  # (w, d1, b1, d2, b2, ...)
    tensors, labels = [], []
    total = float(np.linalg.norm(rest)) ** 2
    for x in range(1, L):
        wl, d, b = rest.shape[0], rest.shape[1], rest.shape[2]
        n_plus = chain.n_plus(x)
        n_minus = chain.n_minus(x + 1)
        tail = rest.shape[3:]
        mat = rest.reshape(wl, d, b, tail[0], -1)
        blocks_l, blocks_r, labs = [], [], []
        covered = np.zeros(mat.shape, dtype=bool)
        for q in range(chain.nbar + 1):
            jl = np.flatnonzero(n_plus == q)
            jr = np.flatnonzero(n_minus == chain.nbar - q)
            if not len(jl) or not len(jr):
                continue
            sub = mat[:, jl][:, :, :, jr]
            covered[np.ix_(range(wl), jl, range(b), jr, range(mat.shape[4]))] = True
            rows = wl * len(jl) * b
            u, s, vh = np.linalg.svd(sub.reshape(rows, -1), full_matrices=False)
            keep = s > tol * max(s[0] if len(s) else 0.0, 1e-300)
            u, s, vh = u[:, keep], s[keep], vh[keep]
            r = len(s)
            if not r:
                continue
            left = np.zeros((wl, d, b, r), dtype=complex)
            left[:, jl] = u.reshape(wl, len(jl), b, r)
            right = np.zeros((r, tail[0], mat.shape[4]), dtype=complex)
            right[:, jr] = (s[:, None] * vh).reshape(r, len(jr), -1)
            blocks_l.append(left)
            blocks_r.append(right)
            labs.append(np.full(r, q))
        leak = float(np.linalg.norm(mat[~covered])) ** 2
        if leak > leak_tol * max(total, 1e-300):
            raise ValueError(f"input has weight {leak:.3e} outside the constrained support")
        tensors.append(np.concatenate(blocks_l, axis=3))
        labels.append(np.concatenate(labs))
        rest = np.concatenate(blocks_r, axis=0).reshape((-1,) + tail)
    tensors.append(rest.reshape(rest.shape[0], rest.shape[1], rest.shape[2], 1))
    st = _empty(chain, tensors, labels, **kw)
    st.center = L
    return st
