"""Suzuki-Trotter layer schedules and constrained two-site gates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..links import ChargeSectorMap

ODD, EVEN = "odd", "even"
GATE_TOL = 1e-12


@dataclass(frozen=True)
class TrotterSchedule:
    """Layer list ``(parity, coefficient)`` with step ``gamma``.

    A full step multiplies the state by ``prod exp(c * gamma * H_parity)``.
    Odd links are ``(1,2), (3,4), ...``.
    """

    order: int
    layers: tuple
    gamma: complex

    def weight(self, parity: str) -> float:
        return sum(c for p, c in self.layers if p == parity)


def forest_ruth_theta() -> float:
    return 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))


def trotter_schedule(p: int, gamma: complex) -> TrotterSchedule:
    if p == 1:
        layers = ((ODD, 1.0), (EVEN, 1.0))
    elif p == 2:
        layers = ((ODD, 0.5), (EVEN, 1.0), (ODD, 0.5))
    elif p == 4:
        th = forest_ruth_theta()
        layers = ((ODD, th / 2), (EVEN, th), (ODD, (1 - th) / 2), (EVEN, 1 - 2 * th),
                  (ODD, (1 - th) / 2), (EVEN, th), (ODD, th / 2))
    else:
        raise ValueError(f"unsupported Trotter order {p}; choose 1, 2 or 4")
    return TrotterSchedule(p, layers, complex(gamma))


def step_gamma(dt: float, mode: str) -> complex:
    """``-i dt`` for real time; ``-dt/2`` for imaginary time, since rho = X X^dagger."""
    if mode == "real":
        return -1j * dt
    if mode == "imaginary":
        return complex(-dt / 2)
    raise ValueError(f"unknown mode {mode!r}")


def links_of(parity: str, L: int) -> list[int]:
    start = 1 if parity == ODD else 2
    return list(range(start, L, 2))


@dataclass(frozen=True)
class ProjectedGate:
    """``M = Q exp(c gamma h)`` on one link with its restriction to the admissible pairs."""

    link: int
    full: np.ndarray
    omega: np.ndarray  # rows/cols ordered like the sector map triplets
    sectors: ChargeSectorMap


def build_projected_gate(h: np.ndarray, Q: np.ndarray, c_gamma: complex,
                         sectors: ChargeSectorMap | None = None, placement: str = "after",
                         outer: tuple | None = None) -> ProjectedGate | np.ndarray:
    """Exponentiate a Hermitian two-site term and attach the link projector.

    ``placement`` is ``after`` (Q e), ``before`` (e Q) or ``both`` (Q e Q); they
    coincide because the projector commutes with ``h``. With ``sectors`` the
    structure is checked: nothing may connect to pairs outside the admissible
    set, and if ``outer = (n_minus_left, n_plus_right)`` is given, the outer
    link charges must be conserved. Such entries must be below 1e-12 and are
    then set to exactly zero.
    """
    h = np.asarray(h)
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if np.abs(h - h.conj().T).max(initial=0.0) > GATE_TOL * scale:
        raise ValueError("two-site Hamiltonian is not Hermitian")
    if c_gamma == 0:
        expo = np.eye(len(h), dtype=complex)
    else:
        w, v = np.linalg.eigh((h + h.conj().T) / 2)
        expo = (v * np.exp(c_gamma * w)) @ v.conj().T
    Q = np.asarray(Q)
    if placement == "after":
        M = Q @ expo
    elif placement == "before":
        M = expo @ Q
    elif placement == "both":
        M = Q @ expo @ Q
    else:
        raise ValueError(f"unknown projector placement {placement!r}")
    if sectors is None:
        return M
    allowed = np.zeros(M.shape, dtype=bool)
    idx = sectors.pair_index
    allowed[np.ix_(idx, idx)] = True
    if outer is not None:
        n_minus, n_plus = outer
        lab = (np.repeat(n_minus, sectors.d_right), np.tile(n_plus, sectors.d_left))
        same = (lab[0][:, None] == lab[0][None, :]) & (lab[1][:, None] == lab[1][None, :])
        allowed &= same
    bad = np.abs(M[~allowed]).max(initial=0.0)
    if bad > GATE_TOL * max(1.0, np.abs(M).max()):
        raise ValueError(f"gate breaks the charge-sector structure (entry {bad:.3e})")
    M = np.where(allowed, M, 0)
    return ProjectedGate(sectors.link, M, M[np.ix_(idx, idx)], sectors)
