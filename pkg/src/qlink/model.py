"""Quantum link model definitions and microscopic operators.

Vertices are numbered ``x = 1..L`` (open chain); vertex ``x`` hosts the left
rishon mode ``(x,-)``, the matter field and the right rishon mode ``(x,+)``,
in that order. Vertex 1 is odd, which fixes the sign of the staggered mass
``m (-1)^x``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .fock import FockRegister, Mode


class ConfigError(ValueError):
    """Invalid or unsupported model configuration."""


class Group(str, enum.Enum):
    U1 = "U1"
    U2 = "U2"


class RishonStatistics(str, enum.Enum):
    BOSONIC = "bosonic-truncated"
    FERMIONIC = "fermionic"


class MatterKind(str, enum.Enum):
    SPINLESS = "spinless-fermion"
    SPINHALF = "spinhalf-fermion"


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class HamiltonianParams:
    """Couplings: hopping ``J``, staggered mass, abelian and non-abelian electric energy."""

    J: float = 1.0
    mass: float = 0.0
    g2: float = 1.0
    g2_nonab: float = 0.0

    def __post_init__(self):
        for name in ("J", "mass", "g2", "g2_nonab"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"coupling {name} must be finite")


@dataclass(frozen=True)
class GaugeModelSpec:
    """Declarative description of a 1D quantum link model.

    ``filling`` is the per-vertex target of ``n_psi + n_- + n_+`` given as
    ``(odd_vertices, even_vertices)``. When omitted, the U(1) default is the
    staggered ``(nbar + 1, nbar)`` and the U(2) default is ``(2, 2)`` for one
    rishon and ``(4, 2)`` (i.e. ``3 - (-1)^x``) for two.
    """

    group: Group = Group.U1
    nbar: int = 1
    L: int = 4
    rishon_statistics: RishonStatistics | None = None
    matter: MatterKind | None = None
    filling: tuple[int, int] | None = None
    params: HamiltonianParams = field(default_factory=HamiltonianParams)

    def __post_init__(self):
        object.__setattr__(self, "group", Group(self.group))
        if self.rishon_statistics is None:
            stats = (RishonStatistics.BOSONIC if self.group is Group.U1
                     else RishonStatistics.FERMIONIC)
            object.__setattr__(self, "rishon_statistics", stats)
        object.__setattr__(self, "rishon_statistics", RishonStatistics(self.rishon_statistics))
        if self.matter is None:
            kind = MatterKind.SPINLESS if self.group is Group.U1 else MatterKind.SPINHALF
            object.__setattr__(self, "matter", kind)
        object.__setattr__(self, "matter", MatterKind(self.matter))
        if self.filling is None:
            object.__setattr__(self, "filling", self._default_filling())
        object.__setattr__(self, "filling", tuple(int(v) for v in self.filling))
        self._validate()

    def _default_filling(self):
        if self.group is Group.U1:
            return (self.nbar + 1, self.nbar)
        if self.nbar == 1:
            return (2, 2)
        return (self.nbar + 2, self.nbar)

    def _validate(self):
        if self.L < 2:
            raise ConfigError("chain length L must be >= 2")
        if self.nbar < 1:
            raise ConfigError("nbar must be >= 1")
        if self.group is Group.U1 and self.matter is not MatterKind.SPINLESS:
            raise ConfigError("U1 models use spinless-fermion matter")
        if self.group is Group.U2:
            if self.matter is not MatterKind.SPINHALF:
                raise ConfigError("U2 models use spinhalf-fermion matter")
            if self.rishon_statistics is not RishonStatistics.FERMIONIC:
                raise ConfigError("U2 models are supported with fermionic rishons only")
        elif self.params.g2_nonab != 0.0:
            raise ConfigError("g2_nonab must be 0 for U1 models")
        if self.rishon_statistics is RishonStatistics.FERMIONIC:
            cap = 2 * self.n_colors
            if self.nbar > cap:
                raise ConfigError(f"fermionic rishons allow at most {cap} per link")
        if len(self.filling) != 2 or min(self.filling) < 0:
            raise ConfigError("filling must be two non-negative integers (odd, even)")

    @property
    def n_colors(self) -> int:
        return 1 if self.group is Group.U1 else 2

    @property
    def colors(self) -> tuple[str, ...]:
        return ("",) if self.group is Group.U1 else ("u", "d")

    @property
    def staggered(self) -> bool:
        return self.filling[0] != self.filling[1]

    def target(self, x: int) -> int:
        """Gauss-law particle number on vertex ``x`` (1-based)."""
        return self.filling[0] if x % 2 else self.filling[1]

    def check_vertex(self, x: int):
        if not 1 <= x <= self.L:
            raise IndexError(f"vertex {x} outside 1..{self.L}")

    def check_link(self, x: int):
        if not 1 <= x <= self.L - 1:
            raise IndexError(f"link ({x},{x + 1}) outside the chain of length {self.L}")

    def with_params(self, **kw) -> GaugeModelSpec:
        from dataclasses import replace
        return replace(self, params=replace(self.params, **kw))

    def with_length(self, L: int) -> GaugeModelSpec:
        from dataclasses import replace
        return replace(self, L=L)


def u1_model(nbar=1, L=4, J=1.0, mass=0.0, g2=1.0, statistics="bosonic-truncated"):
    return GaugeModelSpec(Group.U1, nbar, L, RishonStatistics(statistics),
                          params=HamiltonianParams(J=J, mass=mass, g2=g2))


def u2_model(nbar=1, L=4, J=1.0, mass=0.0, g2=1.0, g2_nonab=1.0):
    return GaugeModelSpec(Group.U2, nbar, L,
                          params=HamiltonianParams(J=J, mass=mass, g2=g2, g2_nonab=g2_nonab))


def worked_models(L=4):
    """The four 1D examples: U(1) with one and two rishons, U(2) with one and two."""
    return {
        "u1_n1": u1_model(1, L),
        "u1_n2": u1_model(2, L),
        "u2_n1": u2_model(1, L),
        "u2_n2": u2_model(2, L),
    }


def _vertex_modes(spec: GaugeModelSpec, prefix: str = ""):
    ferm_rishon = spec.rishon_statistics is RishonStatistics.FERMIONIC
    rdim = 2 if ferm_rishon else spec.nbar + 1
    modes = []
    for side in ("-", "psi", "+"):
        for c in spec.colors:
            if side == "psi":
                modes.append(Mode(f"{prefix}psi{c}", fermionic=True))
            else:
                modes.append(Mode(f"{prefix}{side}{c}", fermionic=ferm_rishon, dim=rdim))
    return modes


class _Ops:
    """Operator helpers shared by vertex and pair registers."""

    def __init__(self, reg: FockRegister, colors):
        self.reg = reg
        self.colors = colors

    def c(self, name):
        return self.reg.annihilate(name)

    def cdag(self, name):
        return self.reg.create(name)

    def n(self, prefix, side):
        return sum(self.reg.number(f"{prefix}{side}{c}") for c in self.colors)

    def spin(self, prefix, side, nu):
        out = sp.csr_matrix((self.reg.dim, self.reg.dim), dtype=complex)
        for a, ca in enumerate(self.colors):
            for b, cb in enumerate(self.colors):
                coef = PAULI[nu][a, b] / 2
                if coef != 0:
                    out = out + coef * (self.cdag(f"{prefix}{side}{ca}") @ self.c(f"{prefix}{side}{cb}"))
        return out.tocsr()

    def casimir(self, prefix, side):
        return sum(self.spin(prefix, side, nu) @ self.spin(prefix, side, nu) for nu in range(3))

    def hop_out(self, prefix):
        """sum_a psi^a† c^a_{+}: matter created, right rishon destroyed."""
        return sum(self.cdag(f"{prefix}psi{a}") @ self.c(f"{prefix}+{a}") for a in self.colors)

    def hop_in(self, prefix):
        """sum_b c^b†_{-} psi^b: left rishon created, matter destroyed."""
        return sum(self.cdag(f"{prefix}-{b}") @ self.c(f"{prefix}psi{b}") for b in self.colors)


@dataclass
class LocalOperatorSet:
    """Single-vertex operators (sparse CSR) for a given model.

    Structure is identical on every vertex; only the Gauss-law targets depend
    on the vertex parity, see :meth:`gauss_generators`.
    """

    spec: GaugeModelSpec
    register: FockRegister
    psi: dict
    c_minus: dict
    c_plus: dict
    n_psi: sp.csr_matrix
    n_minus: sp.csr_matrix
    n_plus: sp.csr_matrix
    hop_out: sp.csr_matrix
    hop_in: sp.csr_matrix
    spin_minus: tuple = ()
    spin_plus: tuple = ()
    spin_psi: tuple = ()

    @property
    def dim(self) -> int:
        return self.register.dim

    @cached_property
    def n_total(self):
        return (self.n_psi + self.n_minus + self.n_plus).tocsr()

    @cached_property
    def casimir_minus(self):
        return sum(s @ s for s in self.spin_minus) if self.spin_minus else None

    @cached_property
    def casimir_plus(self):
        return sum(s @ s for s in self.spin_plus) if self.spin_plus else None

    def su2_generators(self):
        return tuple((self.spin_minus[nu] + self.spin_psi[nu] + self.spin_plus[nu]).tocsr()
                     for nu in range(3)) if self.spin_psi else ()

    @cached_property
    def over_capacity(self):
        """Diagonal indicator of states with more than ``nbar`` rishons in one mode.

        Such states can never meet the link constraint, so they are excluded
        from the vertex space together with the Gauss law.
        """
        nbar = self.spec.nbar
        bad = (self.n_minus.diagonal().real > nbar + 0.5) | (self.n_plus.diagonal().real > nbar + 0.5)
        return sp.diags(bad.astype(complex), format="csr")

    def gauss_generators(self, x: int):
        """Generators shifted so that physical states are their joint kernel."""
        shift = self.spec.target(x) * sp.identity(self.dim, dtype=complex, format="csr")
        return (self.n_total - shift).tocsr(), *self.su2_generators()

    def vertex_constraints(self, x: int):
        """Gauss-law generators plus the rishon capacity indicator."""
        return *self.gauss_generators(x), self.over_capacity


def build_local_operators(spec: GaugeModelSpec) -> LocalOperatorSet:
    reg = FockRegister(_vertex_modes(spec))
    ops = _Ops(reg, spec.colors)
    spins = {}
    if spec.group is Group.U2:
        for side in ("-", "psi", "+"):
            spins[side] = tuple(ops.spin("", side, nu) for nu in range(3))
    return LocalOperatorSet(
        spec=spec,
        register=reg,
        psi={c: ops.c(f"psi{c}") for c in spec.colors},
        c_minus={c: ops.c(f"-{c}") for c in spec.colors},
        c_plus={c: ops.c(f"+{c}") for c in spec.colors},
        n_psi=ops.n("", "psi").tocsr(),
        n_minus=ops.n("", "-").tocsr(),
        n_plus=ops.n("", "+").tocsr(),
        hop_out=ops.hop_out("").tocsr(),
        hop_in=ops.hop_in("").tocsr(),
        spin_minus=spins.get("-", ()),
        spin_plus=spins.get("+", ()),
        spin_psi=spins.get("psi", ()),
    )


@dataclass
class LinkOperatorSet:
    """Operators on the two rishon modes of one link, ``(x,+)`` then ``(x+1,-)``."""

    register: FockRegister
    U: dict
    E: sp.csr_matrix
    N: sp.csr_matrix
    L: tuple
    R: tuple


def build_link_operators(spec: GaugeModelSpec) -> LinkOperatorSet:
    """Rishon bilinears ``U^{ab} = c^a_{x,+} c^b†_{x+1,-}`` and the link fields."""
    modes = [m for m in _vertex_modes(spec, "l") if m.name.startswith("l+")]
    modes += [m for m in _vertex_modes(spec, "r") if m.name.startswith("r-")]
    reg = FockRegister(modes)
    ops = _Ops(reg, spec.colors)
    U = {(a, b): (ops.c(f"l+{a}") @ ops.cdag(f"r-{b}")).tocsr()
         for a in spec.colors for b in spec.colors}
    n_plus, n_minus = ops.n("l", "+"), ops.n("r", "-")
    spins_l = spins_r = ()
    if spec.group is Group.U2:
        spins_l = tuple(ops.spin("l", "+", nu) for nu in range(3))
        spins_r = tuple(ops.spin("r", "-", nu) for nu in range(3))
    return LinkOperatorSet(reg, U, ((n_minus - n_plus) / 2).tocsr(),
                           (n_minus + n_plus).tocsr(), spins_l, spins_r)


MASS_SPLITS = ("symmetric", "right")


def mass_weights(spec: GaugeModelSpec, x: int, split: str = "symmetric") -> tuple[float, float]:
    """Share of the single-vertex mass terms carried by the gate on link ``(x, x+1)``.

    ``symmetric`` halves each bulk vertex between its two gates; ``right`` puts
    the whole vertex term in the gate to its left, so vertex ``x+1`` always
    lands in gate ``x``.
    """
    if split == "symmetric":
        return (1.0 if x == 1 else 0.5), (1.0 if x + 1 == spec.L else 0.5)
    if split == "right":
        return (1.0 if x == 1 else 0.0), 1.0
    raise ValueError(f"unknown mass split {split!r}")


def hamiltonian_terms(spec: GaugeModelSpec, ops: LocalOperatorSet, x: int,
                      mass_split: str = "symmetric"):
    """Two-site Hamiltonian on link ``(x, x+1)`` as a list of ``(coef, O_x, O_x+1)``.

    Every factor is fermion-parity even, so the Jordan-Wigner strings between
    the two vertices cancel and each term is a plain tensor product.
    """
    spec.check_link(x)
    p = spec.params
    one = sp.identity(ops.dim, dtype=complex, format="csr")
    terms = []
    if p.J:
        terms.append((p.J, ops.hop_out, ops.hop_in))
        terms.append((p.J, ops.hop_out.conj().T.tocsr(), ops.hop_in.conj().T.tocsr()))
    # E = (n_{x+1,-} - n_{x,+}) / 2
    g_e = p.g2 if spec.group is Group.U1 else p.g2 / 2
    if g_e:
        terms.append((g_e / 4, (ops.n_plus @ ops.n_plus).tocsr(), one))
        terms.append((g_e / 4, one, (ops.n_minus @ ops.n_minus).tocsr()))
        terms.append((-g_e / 2, ops.n_plus, ops.n_minus))
    if spec.group is Group.U2 and p.g2_nonab:
        terms.append((p.g2_nonab / 2, ops.casimir_plus, one))
        terms.append((p.g2_nonab / 2, one, ops.casimir_minus))
    if p.mass:
        wl, wr = mass_weights(spec, x, mass_split)
        terms.append((p.mass * (-1) ** x * wl, ops.n_psi, one))
        terms.append((p.mass * (-1) ** (x + 1) * wr, one, ops.n_psi))
    return terms


def build_pair_register(spec: GaugeModelSpec) -> FockRegister:
    return FockRegister(_vertex_modes(spec, "x.") + _vertex_modes(spec, "y."))


def build_two_site_hamiltonian(spec: GaugeModelSpec, x: int) -> sp.csr_matrix:
    """Two-site Hamiltonian on the unreduced pair space, built with global JW strings.

    Independent of :func:`hamiltonian_terms`: operators are created directly on
    the twelve- (U2) or six-mode (U1) pair register.
    """
    spec.check_link(x)
    reg = build_pair_register(spec)
    ops = _Ops(reg, spec.colors)
    p = spec.params
    h = sp.csr_matrix((reg.dim, reg.dim), dtype=complex)
    if p.J:
        hop = sum(ops.cdag(f"x.psi{a}") @ ops.c(f"x.+{a}") @ ops.cdag(f"y.-{b}") @ ops.c(f"y.psi{b}")
                  for a in spec.colors for b in spec.colors)
        h = h + p.J * (hop + hop.conj().T)
    E = (ops.n("y.", "-") - ops.n("x.", "+")) / 2
    g_e = p.g2 if spec.group is Group.U1 else p.g2 / 2
    h = h + g_e * (E @ E)
    if spec.group is Group.U2:
        h = h + (p.g2_nonab / 2) * (ops.casimir("x.", "+") + ops.casimir("y.", "-"))
    wl, wr = mass_weights(spec, x)
    h = h + p.mass * ((-1) ** x * wl * ops.n("x.", "psi") + (-1) ** (x + 1) * wr * ops.n("y.", "psi"))
    return h.tocsr()
