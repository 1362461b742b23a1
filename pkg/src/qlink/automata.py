"""Constrained Hilbert-space dimensions from a cellular automaton on link charges.

Growing an open chain one vertex at a time, a reduced state ``j`` of the new
vertex attaches to chains whose rightmost link charge is ``nbar - n_-(j)`` and
leaves charge ``n_+(j)`` on the new rightmost link. Sector dimensions follow
by summing over these arrows. Counts are Python integers, so they never
overflow.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .model import u1_model
from .reduction import ReducedBasis, framed_charges


@dataclass(frozen=True)
class AutomatonGraph:
    """Charge nodes ``0..nbar`` and one arrow per reduced state and vertex parity.

    ``arrows[0]`` serves odd vertices and ``arrows[1]`` even ones; each entry
    is ``(source_q, target_q)`` in reduced-state order.
    """

    nbar: int
    arrows: tuple
    frame: str = "link"

    @property
    def nodes(self) -> range:
        return range(self.nbar + 1)

    @property
    def period(self) -> int:
        return 1 if self.arrows[0] == self.arrows[1] else 2

    def arrows_for(self, x: int):
        """Arrows used when vertex ``x`` (1-based) is appended."""
        return self.arrows[0] if x % 2 else self.arrows[1]


def build_automaton(basis: ReducedBasis, frame: str = "link") -> AutomatonGraph:
    """Arrows from the canonical charges of ``basis``.

    ``frame="link"`` complements the charge on links whose left vertex is odd,
    which renders the staggered models translation invariant (period 1);
    ``frame="raw"`` uses the rishon numbers as they are. Both give the same
    totals; sector labels differ by ``q -> nbar - q`` on the complemented links.
    """
    if frame not in ("link", "raw"):
        raise ValueError(f"unknown frame {frame!r}")
    nbar = basis.nbar
    arrows = []
    for x in (1, 2):
        vb = basis.vertices[(x - 1) % len(basis.vertices)]
        if frame == "link":
            fm, fp = framed_charges(nbar, x, vb.n_minus, vb.n_plus)
        else:
            fm, fp = vb.n_minus, vb.n_plus
        arrows.append(tuple((int(nbar - a), int(b)) for a, b in zip(fm, fp)))
    for group in arrows:
        for s, t in group:
            if not (0 <= s <= nbar and 0 <= t <= nbar):
                raise ValueError(f"arrow {s}->{t} leaves the node set 0..{nbar}")
    return AutomatonGraph(nbar, tuple(arrows), frame)


@dataclass
class DimensionTable:
    """``sectors[l][q] = D_q(l)`` for ``l = 0..l_max``."""

    nbar: int
    sectors: list = field(default_factory=list)

    @property
    def l_max(self) -> int:
        return len(self.sectors) - 1

    def total(self, ell: int) -> int:
        return sum(self.sectors[ell])

    @property
    def totals(self) -> list[int]:
        return [sum(row) for row in self.sectors]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["ell", *[f"D_{q}" for q in range(self.nbar + 1)], "D_total"])
        for ell, row in enumerate(self.sectors):
            w.writerow([ell, *row, sum(row)])
        return buf.getvalue()


def step(graph: AutomatonGraph, dims, x: int):
    """Sector dimensions after appending vertex ``x``."""
    new = [0] * (graph.nbar + 1)
    for src, tgt in graph.arrows_for(x):
        new[tgt] += dims[src]
    return new


def dimension_table(graph: AutomatonGraph, l_max: int) -> DimensionTable:
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    rows = [[1] * (graph.nbar + 1)]
    for ell in range(1, l_max + 1):
        rows.append(step(graph, rows[-1], ell))
    return DimensionTable(graph.nbar, rows)


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    slope: float
    intercept: float
    residual: float
    window: tuple

    def to_json(self) -> str:
        return json.dumps({"alpha": self.alpha, "intercept": self.intercept,
                           "residual": self.residual, "slope": self.slope,
                           "window": list(self.window)}, indent=2, sort_keys=True)


def fit_alpha(table: DimensionTable, window: tuple[int, int] = (100, 1000)) -> AlphaFit:
    """Least-squares fit of ``ln D(l) = slope * l + c`` over ``window`` (inclusive).

    ``math.log`` works on the exact integers, so there is no overflow or
    premature rounding for hundreds of digits.
    """
    lo, hi = window
    if hi > table.l_max or lo < 0:
        raise ValueError(f"window {window} not covered by table up to {table.l_max}")
    if hi - lo + 1 < 10:
        raise ValueError("fit window needs at least 10 points")
    totals = table.totals[lo:hi + 1]
    if any(b <= a for a, b in zip(totals, totals[1:])):
        raise ValueError("total dimension is not strictly increasing over the window")
    xs = list(range(lo, hi + 1))
    ys = [math.log(t) for t in totals]
    n = len(xs)
    xm = math.fsum(xs) / n
    ym = math.fsum(ys) / n
    sxx = math.fsum((x - xm) ** 2 for x in xs)
    sxy = math.fsum((x - xm) * (y - ym) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ym - slope * xm
    residual = max(abs(y - (slope * x + intercept)) for x, y in zip(xs, ys))
    return AlphaFit(math.exp(slope), slope, intercept, residual, (lo, hi))


def u1_alpha(nbar: int, window=(100, 1000)) -> AlphaFit:
    basis = ReducedBasis(u1_model(nbar, L=2))
    table = dimension_table(build_automaton(basis), window[1])
    return fit_alpha(table, window)


@dataclass
class SaturationScan:
    rows: list  # (nbar, alpha, 2 - alpha)

    def loglog_fit(self, nbar_min: int = 2):
        """Slope, intercept and R² of ``ln(2 - alpha)`` against ``ln nbar``."""
        pts = [(math.log(n), math.log(gap)) for n, _, gap in self.rows if n >= nbar_min]
        xs, ys = zip(*pts)
        n = len(xs)
        xm, ym = sum(xs) / n, sum(ys) / n
        sxx = sum((x - xm) ** 2 for x in xs)
        slope = sum((x - xm) * (y - ym) for x, y in zip(xs, ys)) / sxx
        icpt = ym - slope * xm
        ss_res = sum((y - slope * x - icpt) ** 2 for x, y in zip(xs, ys))
        ss_tot = sum((y - ym) ** 2 for y in ys)
        return slope, icpt, 1 - ss_res / ss_tot


def alpha_saturation_scan(nbar_list, window=(100, 1000)) -> SaturationScan:
    """Growth basis of the U(1) family versus rishon number.

    Raises ``ValueError`` if alpha is not strictly increasing or reaches 2.
    """
    rows = []
    for nbar in nbar_list:
        a = u1_alpha(nbar, window).alpha
        rows.append((nbar, a, 2 - a))
    for (n0, a0, _), (n1, a1, _) in zip(rows, rows[1:]):
        if n1 > n0 and not a1 > a0:
            raise ValueError(f"alpha not increasing between nbar={n0} and {n1}")
    if any(a >= 2 for _, a, _ in rows):
        raise ValueError("alpha reached 2 at finite nbar")
    return SaturationScan(rows)
