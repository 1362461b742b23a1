"""Gauge-invariant local bases.

For each vertex the joint kernel of the (shifted) Gauss-law generators is
computed, and an orthonormal basis of it is chosen that also diagonalizes the
two rishon number operators. Rows of :attr:`VertexBasis.A` map unreduced
vertex vectors onto reduced coordinates, so ``A A† = 1`` and ``A† A = P``.

Reduced states are ordered by their rishon charges in the *link frame*, in
which the counts on links whose left vertex is odd are replaced by
``nbar - n``. The frame leaves the link constraint ``n_+(x) + n_-(x+1) = nbar``
unchanged and makes the staggered models translation invariant, so state
labels agree between odd and even vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .model import (ConfigError, GaugeModelSpec, LocalOperatorSet,
                    build_local_operators, hamiltonian_terms)

NULL_RTOL = 1e-10


class ModelError(ConfigError):
    """The Gauss law admits no state on some vertex."""


def _dense(op):
    return op.toarray() if sp.issparse(op) else np.asarray(op)


@dataclass(frozen=True)
class VertexBasis:
    """Reduced basis of one vertex.

    ``coefficients[j]`` holds the amplitudes of ``|j>_r`` on the product basis
    ``|s_-, s_psi, s_+>``; ``n_minus[j]`` and ``n_plus[j]`` are its rishon
    numbers (plain occupations, not link-frame values).
    """

    x: int
    coefficients: np.ndarray
    n_minus: np.ndarray
    n_plus: np.ndarray
    n_psi: np.ndarray
    pivots: np.ndarray

    @property
    def d(self) -> int:
        return self.coefficients.shape[0]

    @property
    def D(self) -> int:
        return self.coefficients.shape[1]

    @property
    def A(self) -> np.ndarray:
        return self.coefficients.conj()

    @property
    def projector(self) -> np.ndarray:
        return self.A.conj().T @ self.A


def link_frame_flip(x_left: int) -> bool:
    """Whether charges on link ``(x_left, x_left+1)`` are complemented in the link frame."""
    return x_left % 2 == 1


def framed_charges(nbar: int, x: int, n_minus, n_plus):
    """Link-frame ``(n_-, n_+)`` of states on vertex ``x``."""
    n_minus = np.asarray(n_minus)
    n_plus = np.asarray(n_plus)
    fm = nbar - n_minus if link_frame_flip(x - 1) else n_minus
    fp = nbar - n_plus if link_frame_flip(x) else n_plus
    return fm, fp


def build_gauge_projector(ops: LocalOperatorSet, x: int) -> np.ndarray:
    """Projector onto the joint kernel of the shifted Gauss-law generators at ``x``.

    States with more than ``nbar`` rishons in a single mode are excluded too.
    """
    ops.spec.check_vertex(x)
    stacked = np.vstack([_dense(g) for g in ops.vertex_constraints(x)])
    _, s, vh = np.linalg.svd(stacked)
    scale = max(s[0], 1.0) if s.size else 1.0
    rank = int(np.sum(s > NULL_RTOL * scale))
    kernel = vh[rank:].conj().T
    if kernel.shape[1] == 0:
        raise ModelError(f"no gauge-invariant state on vertex {x} for filling {ops.spec.filling}")
    return kernel @ kernel.conj().T


def _assert_commute(a, b, what, tol=1e-12):
    comm = a @ b - b @ a
    err = np.max(np.abs(_dense(comm))) if comm.shape[0] else 0.0
    if err > tol:
        raise AssertionError(f"{what} do not commute (max entry {err:.2e})")


def canonical_reduced_basis(P: np.ndarray, ops: LocalOperatorSet, x: int) -> VertexBasis:
    """Orthonormal basis of ``range(P)`` diagonal in ``n_-`` and ``n_+``.

    Within each block of fixed rishon numbers the basis is obtained by
    Gram-Schmidt on the projected product states taken in product-basis order,
    which makes the choice (and the sign, positive on the pivot) deterministic.
    """
    for g in ops.gauss_generators(x):
        _assert_commute(ops.n_minus, g, "n_- and G")
        _assert_commute(ops.n_plus, g, "n_+ and G")
    nm = np.rint(ops.n_minus.diagonal().real).astype(int)
    npl = np.rint(ops.n_plus.diagonal().real).astype(int)
    npsi = np.rint(ops.n_psi.diagonal().real).astype(int)
    block = nm * (npl.max() + 1) + npl
    leak = np.abs(P[block[:, None] != block[None, :]])
    if leak.size and leak.max() > 1e-10:
        raise AssertionError("gauge projector mixes rishon-number sectors")

    vectors, pivots = [], []
    for key in np.unique(block):
        found = []
        for k in np.flatnonzero(block == key):
            v = P[:, k].astype(complex)
            for _ in range(2):
                for u in found:
                    v = v - u * (u.conj() @ v)
            norm = np.linalg.norm(v)
            if norm > 1e-8:
                v = v / norm
                v = v * (abs(v[k]) / v[k])
                found.append(v)
                pivots.append(k)
        vectors.extend(found)
    coeffs = np.array(vectors)
    coeffs[np.abs(coeffs) < 1e-15] = 0.0
    if np.allclose(coeffs.imag, 0.0, atol=1e-14):
        coeffs = coeffs.real.astype(complex)
    pivots = np.array(pivots)
    n_minus, n_plus, n_psi = nm[pivots], npl[pivots], npsi[pivots]
    fm, fp = framed_charges(ops.spec.nbar, x, n_minus, n_plus)
    order = np.lexsort((pivots, fm, fp))
    return VertexBasis(x=x, coefficients=coeffs[order], n_minus=n_minus[order],
                       n_plus=n_plus[order], n_psi=n_psi[order], pivots=pivots[order])


def reduce_operator(isometries, op) -> np.ndarray:
    """``(A_1 ⊗ ... ⊗ A_k) O (A_1 ⊗ ... ⊗ A_k)†`` for a list of vertex maps ``A``."""
    A = isometries[0]
    for B in isometries[1:]:
        A = np.kron(A, B)
    if op.shape != (A.shape[1], A.shape[1]):
        raise ValueError(f"operator shape {op.shape} does not match isometry input {A.shape[1]}")
    left = op @ A.conj().T
    return A @ np.asarray(left)


class ReducedBasis:
    """Per-vertex reduced bases of a whole chain plus the local operators."""

    def __init__(self, spec: GaugeModelSpec, ops: LocalOperatorSet | None = None):
        self.spec = spec
        self.ops = ops if ops is not None else build_local_operators(spec)
        by_parity = {}
        for parity_x in (1, 2):
            P = build_gauge_projector(self.ops, parity_x)
            by_parity[parity_x] = canonical_reduced_basis(P, self.ops, parity_x)
        self.vertices = []
        for x in range(1, spec.L + 1):
            vb = by_parity[2 - x % 2]
            self.vertices.append(VertexBasis(x, vb.coefficients, vb.n_minus, vb.n_plus,
                                             vb.n_psi, vb.pivots))

    @property
    def nbar(self) -> int:
        return self.spec.nbar

    @property
    def L(self) -> int:
        return self.spec.L

    def __getitem__(self, x: int) -> VertexBasis:
        self.spec.check_vertex(x)
        return self.vertices[x - 1]

    def __iter__(self):
        return iter(self.vertices)

    def d(self, x: int) -> int:
        return self[x].d

    @property
    def dims(self) -> list[int]:
        return [v.d for v in self.vertices]

    def framed(self, x: int):
        v = self[x]
        return framed_charges(self.nbar, x, v.n_minus, v.n_plus)

    def reduce_local(self, x: int, op) -> np.ndarray:
        return reduce_operator([self[x].A], op)

    def reduce_pair(self, x: int, op) -> np.ndarray:
        return reduce_operator([self[x].A, self[x + 1].A], op)

    def two_site_hamiltonian(self, x: int, mass_split: str = "symmetric") -> np.ndarray:
        """Reduced ``h_{x,x+1}`` assembled term by term from vertex factors."""
        self.spec.check_link(x)
        n = self.d(x) * self.d(x + 1)
        h = np.zeros((n, n), dtype=complex)
        for coef, left, right in hamiltonian_terms(self.spec, self.ops, x, mass_split):
            h += coef * np.kron(self.reduce_local(x, left), self.reduce_local(x + 1, right))
        return (h + h.conj().T) / 2

    @cached_property
    def n_psi_reduced(self):
        return [self.reduce_local(x, self.ops.n_psi) for x in range(1, self.L + 1)]

    def electric_field(self, x: int) -> np.ndarray:
        """Reduced ``E_{x,x+1}`` on the pair space."""
        one_l = np.eye(self.d(x))
        one_r = np.eye(self.d(x + 1))
        n_plus = self.reduce_local(x, self.ops.n_plus)
        n_minus = self.reduce_local(x + 1, self.ops.n_minus)
        return (np.kron(one_l, n_minus) - np.kron(n_plus, one_r)) / 2

    def dump(self) -> str:
        """Human-readable listing of every reduced state."""
        reg = self.ops.register
        lines = [f"# reduced basis: group={self.spec.group.value} nbar={self.nbar} "
                 f"filling={self.spec.filling} modes={[m.name for m in reg.modes]}"]
        for v in self.vertices:
            fm, fp = self.framed(v.x)
            lines.append(f"vertex {v.x} ({'odd' if v.x % 2 else 'even'}): d={v.d} D={v.D}")
            for j in range(v.d):
                amps = []
                for s in np.flatnonzero(np.abs(v.coefficients[j]) > 1e-12):
                    occ = "".join(str(o) for o in reg.occupations[s])
                    c = v.coefficients[j, s]
                    c = c.real if abs(c.imag) < 1e-14 else c
                    amps.append(f"{c:+.6f}|{occ}>")
                lines.append(f"  |{j + 1}>_r n-={v.n_minus[j]} n+={v.n_plus[j]} "
                             f"frame=({fm[j]},{fp[j]}) n_psi={v.n_psi[j]}: " + " ".join(amps))
        return "\n".join(lines) + "\n"
