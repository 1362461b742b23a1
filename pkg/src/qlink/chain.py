"""Everything the time-evolution engine needs about one chain, built once."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .links import assemble_global_mpo, build_link_projector, charge_sector_map
from .model import GaugeModelSpec
from .reduction import ReducedBasis


class QLinkChain:
    """Reduced basis, link projectors, sector maps and local observables of a chain.

    Link-indexed accessors take the left vertex ``x`` (1-based).
    """

    def __init__(self, spec: GaugeModelSpec, basis: ReducedBasis | None = None,
                 mass_split: str = "symmetric"):
        self.spec = spec
        self.basis = basis if basis is not None else ReducedBasis(spec)
        self.mass_split = mass_split
        self.mpo = assemble_global_mpo(self.basis)
        self._sectors = [charge_sector_map(self.basis, x) for x in range(1, spec.L)]
        self._links = [build_link_projector(self.basis, x) for x in range(1, spec.L)]
        self._h = [self.basis.two_site_hamiltonian(x, mass_split) for x in range(1, spec.L)]

    @property
    def L(self) -> int:
        return self.spec.L

    @property
    def nbar(self) -> int:
        return self.spec.nbar

    @property
    def dims(self) -> list[int]:
        return self.basis.dims

    def d(self, x: int) -> int:
        return self.basis.d(x)

    def sector(self, x: int):
        self.spec.check_link(x)
        return self._sectors[x - 1]

    def link_projector(self, x: int) -> np.ndarray:
        self.spec.check_link(x)
        return self._links[x - 1][0]

    def h(self, x: int) -> np.ndarray:
        self.spec.check_link(x)
        return self._h[x - 1]

    @property
    def gates(self) -> list[np.ndarray]:
        return list(self._h)

    def n_plus(self, x: int) -> np.ndarray:
        return self.basis[x].n_plus

    def n_minus(self, x: int) -> np.ndarray:
        return self.basis[x].n_minus

    @cached_property
    def n_psi(self) -> list[np.ndarray]:
        return [np.diag(self.basis[x].n_psi.astype(float)).astype(complex)
                for x in range(1, self.L + 1)]

    @cached_property
    def electric(self) -> list[np.ndarray]:
        return [self.basis.electric_field(x) for x in range(1, self.L)]
