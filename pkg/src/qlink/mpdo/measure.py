"""Expectation values ``Tr(rho O) / Tr(rho)`` by left-to-right contraction."""

from __future__ import annotations

import numpy as np

from .state import MpdoState


def _split_two_site(op: np.ndarray, d_l: int, d_r: int):
    """Operator Schmidt split of a two-site operator into MPO cores ``(a, a', out, in)``."""
    t = np.asarray(op).reshape(d_l, d_r, d_l, d_r).transpose(0, 2, 1, 3)
    u, s, vh = np.linalg.svd(t.reshape(d_l * d_l, d_r * d_r), full_matrices=False)
    keep = s > 1e-14 * max(s[0], 1e-300) if len(s) else s > 0
    r = max(int(keep.sum()), 1)
    us = (u[:, :r] * s[:r]).reshape(d_l, d_l, r).transpose(2, 0, 1)[None]
    v = vh[:r].reshape(r, d_r, d_r)[:, None]
    return us, v


def mpo_trace(state: MpdoState, cores) -> complex:
    """``Tr(X^dagger O X)`` for ``O`` given as cores ``(a, a', out, in)``; ``None`` is identity."""
    env = np.ones((1, 1, 1), dtype=complex)  # (ket bond, mpo bond, bra bond)
    for t, core in zip(state.tensors, cores):
        if core is None:
            env = np.einsum("wav,wikW,vikV->WaV", env, t, t.conj(), optimize=True)
        else:
            env = np.einsum("wav,wikW,aAoi,vokV->WAV", env, t, core, t.conj(), optimize=True)
    return complex(env.reshape(-1).sum())


def trace(state: MpdoState) -> float:
    return mpo_trace(state, [None] * state.L).real


def expectation(state: MpdoState, op: np.ndarray, sites) -> complex:
    """``Tr(rho O)/Tr(rho)`` for a one-site (``sites=(x,)``) or two-site (``(x, x+1)``) operator."""
    sites = tuple(sites)
    cores = [None] * state.L
    if len(sites) == 1:
        (x,) = sites
        cores[x - 1] = np.asarray(op)[None, None]
    elif len(sites) == 2 and sites[1] == sites[0] + 1:
        x = sites[0]
        cores[x - 1], cores[x] = _split_two_site(op, state.chain.d(x), state.chain.d(x + 1))
    else:
        raise ValueError("sites must be (x,) or (x, x+1)")
    return mpo_trace(state, cores) / trace(state)


def leakage(state: MpdoState) -> float:
    """``1 - Tr(Q_bar rho)/Tr(rho)`` via the link-projector MPO."""
    cores = [c.astype(complex) for c in state.chain.mpo.cores]
    return float(1.0 - (mpo_trace(state, cores) / trace(state)).real)


def energy(state: MpdoState) -> float:
    tr = trace(state)
    total = 0.0
    for x in range(1, state.L):
        cores = [None] * state.L
        cores[x - 1], cores[x] = _split_two_site(state.chain.h(x), state.chain.d(x),
                                                 state.chain.d(x + 1))
        total += (mpo_trace(state, cores) / tr).real
    return float(total)


def site_occupations(state: MpdoState) -> list[float]:
    return [expectation(state, state.chain.n_psi[x - 1], (x,)).real for x in range(1, state.L + 1)]


def link_fields(state: MpdoState) -> list[float]:
    return [expectation(state, state.chain.electric[x - 1], (x, x + 1)).real
            for x in range(1, state.L)]


def apply_link_projector(state: MpdoState) -> MpdoState:
    """``X -> Q_bar X`` through the MPO; zero bond slices are pruned and labels refreshed."""
    mpo = state.chain.mpo
    new = []
    for x, (t, core) in enumerate(zip(state.tensors, mpo.cores), start=1):
        diag = np.einsum("abjj->abj", core).astype(complex)  # (ml, mr, j)
        wl, d, b, wr = t.shape
        out = np.einsum("abj,wjkv->awjkbv", diag, t).reshape(diag.shape[0] * wl, d, b,
                                                                diag.shape[1] * wr)
        new.append(out)
    labels = []
    for x in range(1, state.L):
        wr = state.tensors[x - 1].shape[3]
        labels.append(np.repeat(np.arange(mpo.nbar + 1), wr))
    for x in range(1, state.L):
        left, right = new[x - 1], new[x]
        keep = (np.abs(left).sum(axis=(0, 1, 2)) > 0) & (np.abs(right).sum(axis=(1, 2, 3)) > 0)
        idx = np.flatnonzero(keep)
        if not len(idx):
            raise ValueError("state has no weight inside the constrained space")
        new[x - 1], new[x] = left[..., idx], right[idx]
        labels[x - 1] = labels[x - 1][idx]
    state.tensors = new
    state.labels = labels
    state.center = None
    return state
