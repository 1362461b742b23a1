"""Brute-force reference on the fully constrained many-body space.

Configurations are tuples ``(j_1, ..., j_L)`` of 0-based reduced labels that
satisfy every link constraint. Dense Hamiltonians on that span are diagonalized
exactly; everything else in the package is checked against these results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .reduction import ReducedBasis

MAX_STATES = 200_000
MAX_DENSE = 6_000


class OracleSizeError(RuntimeError):
    pass


@dataclass
class ConstrainedBasisEnumeration:
    nbar: int
    dims: tuple
    configs: np.ndarray  # (n_states, L), int
    index: dict

    @property
    def L(self) -> int:
        return self.configs.shape[1]

    def __len__(self) -> int:
        return len(self.configs)

    def flat_indices(self) -> np.ndarray:
        """Position of every configuration in the full reduced product space (C order)."""
        return np.ravel_multi_index(tuple(self.configs.T), self.dims)


def _charges(basis: ReducedBasis, x: int):
    vb = basis.vertices[(x - 1) % 2]
    return vb.n_minus, vb.n_plus


def enumerate_constrained(basis: ReducedBasis, L: int | None = None, *,
                          direction: str = "left", max_states: int = MAX_STATES
                          ) -> ConstrainedBasisEnumeration:
    """All link-constrained configurations of an ``L``-vertex chain.

    ``direction="left"`` grows the chain from vertex 1 and yields lexicographic
    order; ``"right"`` grows from vertex ``L`` and yields reverse-lexicographic
    order (last vertex most significant). Both give the same set.
    """
    L = basis.L if L is None else L
    if L < 1:
        raise ValueError("L must be >= 1")
    if direction not in ("left", "right"):
        raise ValueError(f"unknown direction {direction!r}")
    nbar = basis.nbar
    charges = [_charges(basis, x) for x in range(1, L + 1)]
    dims = tuple(len(c[0]) for c in charges)
    out: list[tuple] = []
    order = range(L) if direction == "left" else range(L - 1, -1, -1)
    order = list(order)
    partial = [0] * L

    def ok(pos, prev, j):
        # prev is the vertex already placed next to pos
        if direction == "left":
            return charges[prev][1][partial[prev]] + charges[pos][0][j] == nbar
        return charges[pos][1][j] + charges[prev][0][partial[prev]] == nbar

    def dfs(depth):
        if depth == L:
            out.append(tuple(partial))
            if len(out) > max_states:
                raise OracleSizeError(f"more than {max_states} constrained states")
            return
        pos = order[depth]
        for j in range(dims[pos]):
            if depth and not ok(pos, order[depth - 1], j):
                continue
            partial[pos] = j
            dfs(depth + 1)

    dfs(0)
    configs = np.array(out, dtype=np.int64).reshape(-1, L)
    return ConstrainedBasisEnumeration(nbar, dims, configs, {c: i for i, c in enumerate(out)})


def dense_hamiltonian(enum: ConstrainedBasisEnumeration, gates) -> np.ndarray:
    """``sum_x h_x`` restricted to the enumerated span; ``gates[x-1]`` acts on link ``(x, x+1)``."""
    n, L = len(enum), enum.L
    if n > MAX_DENSE:
        raise OracleSizeError(f"{n} states exceed the dense limit {MAX_DENSE}")
    if len(gates) != L - 1:
        raise ValueError(f"expected {L - 1} gates, got {len(gates)}")
    H = np.zeros((n, n), dtype=complex)
    for x, h in enumerate(gates, start=1):
        dl, dr = enum.dims[x - 1], enum.dims[x]
        h = np.asarray(h)
        if h.shape != (dl * dr, dl * dr):
            raise ValueError(f"gate {x} has shape {h.shape}, expected {(dl * dr,) * 2}")
        for col, cfg in enumerate(enum.configs):
            pair = cfg[x - 1] * dr + cfg[x]
            for out in np.flatnonzero(h[:, pair]):
                new = list(cfg)
                new[x - 1], new[x] = divmod(int(out), dr)
                row = enum.index.get(tuple(new))
                if row is None:
                    if abs(h[out, pair]) > 1e-12:
                        raise ValueError(f"gate {x} leaves the constrained span")
                    continue
                H[row, col] += h[out, pair]
    return H


def chain_gates(basis: ReducedBasis, mass_split: str = "symmetric") -> list[np.ndarray]:
    return [basis.two_site_hamiltonian(x, mass_split) for x in range(1, basis.L)]


def ground_state(H: np.ndarray):
    w, v = np.linalg.eigh(H)
    return float(w[0]), v[:, 0]


def exact_propagate(H: np.ndarray, psi: np.ndarray, t: float, mode: str = "real") -> np.ndarray:
    """``exp(-iHt) psi`` (real) or ``exp(-H t) psi`` (imaginary, not normalized)."""
    if H.shape[0] > MAX_DENSE:
        raise OracleSizeError("propagation dimension above the dense limit")
    w, v = np.linalg.eigh(H)
    if mode == "real":
        phase = np.exp(-1j * w * t)
    elif mode == "imaginary":
        phase = np.exp(-(w - w[0]) * t) * np.exp(-w[0] * t)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return v @ (phase * (v.conj().T @ psi))


def embed(enum: ConstrainedBasisEnumeration, vec: np.ndarray) -> np.ndarray:
    """Constrained-span vector as a full reduced product-space tensor of shape ``dims``."""
    full = np.zeros(int(np.prod(enum.dims)), dtype=complex)
    full[enum.flat_indices()] = vec
    return full.reshape(enum.dims)


def restrict(enum: ConstrainedBasisEnumeration, tensor: np.ndarray) -> np.ndarray:
    return np.asarray(tensor).reshape(-1)[enum.flat_indices()]


def full_reduced_hamiltonian(basis: ReducedBasis, gates=None) -> np.ndarray:
    """``sum_x h_x`` on the unconstrained reduced product space (small chains only)."""
    dims = basis.dims
    total = int(np.prod(dims))
    if total > MAX_DENSE:
        raise OracleSizeError(f"product space {total} above the dense limit")
    gates = chain_gates(basis) if gates is None else gates
    H = np.zeros((total, total), dtype=complex)
    for x, h in enumerate(gates, start=1):
        left = int(np.prod(dims[:x - 1]))
        right = int(np.prod(dims[x + 1:]))
        H += np.kron(np.kron(np.eye(left), h), np.eye(right))
    return H
