"""Second-quantized operators on small mode registers.

A register is an ordered list of modes. Fermionic modes get Jordan-Wigner
strings over the fermionic modes that precede them; bosonic modes are
number-truncated and carry no string. Product basis states are enumerated in
C order over the mode list, i.e. the first mode is the most significant digit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Mode:
    name: str
    fermionic: bool
    dim: int = 2

    def __post_init__(self):
        if self.fermionic and self.dim != 2:
            raise ValueError(f"fermionic mode {self.name!r} must have dim 2")
        if self.dim < 2:
            raise ValueError(f"mode {self.name!r} needs dim >= 2")


class FockRegister:
    """Sparse operator factory for an ordered set of modes."""

    def __init__(self, modes):
        self.modes = tuple(modes)
        names = [m.name for m in self.modes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate mode names")
        self._index = {m.name: i for i, m in enumerate(self.modes)}
        self.dims = tuple(m.dim for m in self.modes)
        self.dim = int(np.prod(self.dims))

    def __len__(self):
        return len(self.modes)

    def position(self, name: str) -> int:
        return self._index[name]

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim, n_modes) integer table of mode occupations per basis state."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1).T
        return grids.astype(np.int64)

    def identity(self):
        return sp.identity(self.dim, dtype=complex, format="csr")

    def number(self, name: str):
        occ = self.occupations[:, self.position(name)]
        return sp.diags(occ.astype(complex), format="csr")

    def parity(self):
        """(-1)^(total fermion number) as a diagonal operator."""
        ferm = [i for i, m in enumerate(self.modes) if m.fermionic]
        n_f = self.occupations[:, ferm].sum(axis=1) if ferm else np.zeros(self.dim)
        return sp.diags((-1.0) ** n_f + 0j, format="csr")

    def annihilate(self, name: str):
        pos = self.position(name)
        mode = self.modes[pos]
        factors = []
        for i, m in enumerate(self.modes):
            if i == pos:
                n = np.arange(1, m.dim)
                factors.append(sp.diags(np.sqrt(n), offsets=1, format="csr"))
            elif i < pos and m.fermionic and mode.fermionic:
                factors.append(sp.diags([1.0, -1.0], format="csr"))
            else:
                factors.append(sp.identity(m.dim, format="csr"))
        out = factors[0]
        for f in factors[1:]:
            out = sp.kron(out, f, format="csr")
        return out.astype(complex)

    def create(self, name: str):
        return self.annihilate(name).conj().T.tocsr()
