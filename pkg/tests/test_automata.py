import json
import math

import pytest

from conftest import get_chain
from qlink.automata import (DimensionTable, alpha_saturation_scan, build_automaton,
                            dimension_table, fit_alpha, step, u1_alpha)
from qlink.model import u1_model, u2_model
from qlink.oracle import enumerate_constrained
from qlink.reduction import ReducedBasis


def graph_of(spec, frame="link"):
    return build_automaton(ReducedBasis(spec.with_length(2)), frame)


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def test_single_rishon_arrows():
    g = graph_of(u1_model(1))
    assert g.arrows[0] == ((1, 0), (0, 0), (0, 1))
    assert g.period == 1


@pytest.mark.parametrize("nbar", [1, 2, 3, 4])
def test_general_rishon_arrows_up_to_reflection(nbar):
    g = graph_of(u1_model(nbar))
    refl = [(nbar - s, nbar - t) for s, t in g.arrows[0]]
    for j, (s, t) in enumerate(refl, start=1):
        k = j // 2
        expected = (k, nbar - k) if j % 2 else (k, nbar + 1 - k)
        assert (s, t) == expected
    assert len(g.arrows[0]) == 2 * nbar + 1


def test_raw_frame_alternates_but_counts_agree():
    rb = ReducedBasis(u1_model(2, 2))
    raw, link = build_automaton(rb, "raw"), build_automaton(rb, "link")
    assert raw.period == 2 and link.period == 1
    assert dimension_table(raw, 30).totals == dimension_table(link, 30).totals
    with pytest.raises(ValueError):
        build_automaton(rb, "diagonal")


def test_double_rishon_u2_raw_charge_connections():
    g = graph_of(u2_model(2), "raw")
    odd = g.arrows[0]
    # arrow target on an odd vertex is n_+, which is the raw intermediate charge of link (1,2)
    assert sorted(t for _, t in odd) == [0, 1, 1, 2, 2, 2]


def test_fibonacci_sectors():
    t = dimension_table(graph_of(u1_model(1)), 60)
    assert t.sectors[:5] == [[1, 1], [2, 1], [3, 2], [5, 3], [8, 5]]
    assert all(t.total(l) == fib(l + 3) for l in range(61))


def test_u2_single_rishon_powers_of_two():
    t = dimension_table(graph_of(u2_model(1)), 200)
    assert all(t.total(l) == 2 ** (l + 1) for l in range(201))


def test_recursion_holds_exactly():
    g = graph_of(u2_model(2))
    t = dimension_table(g, 25)
    for l in range(25):
        nxt = [0] * 3
        for s, q in g.arrows_for(l + 1):
            nxt[q] += t.sectors[l][s]
        assert nxt == t.sectors[l + 1] == step(g, t.sectors[l], l + 1)


def test_seed_and_arbitrary_precision():
    t = dimension_table(graph_of(u1_model(1)), 1000)
    assert t.sectors[0] == [1, 1]
    assert len(str(t.total(1000))) >= 209
    assert dimension_table(graph_of(u1_model(3)), 0).sectors == [[1, 1, 1, 1]]
    with pytest.raises(ValueError):
        dimension_table(graph_of(u1_model(1)), -1)


@pytest.mark.parametrize("name", ["u1_n1", "u1_n2", "u2_n1", "u2_n2"])
def test_automaton_matches_enumeration(name):
    rb = get_chain(name).basis
    t = dimension_table(build_automaton(rb), 8)
    for L in range(1, 9):
        assert len(enumerate_constrained(rb, L)) == t.total(L)


@pytest.mark.parametrize("name", ["u1_n1", "u1_n2", "u2_n1", "u2_n2"])
def test_growth_bounded_by_local_dimension(name):
    rb = get_chain(name).basis
    d = rb.d(1)
    t = dimension_table(build_automaton(rb), 400)
    assert all(t.total(l) <= d ** l for l in range(1, 401))
    fit = fit_alpha(t, (100, 400))
    assert fit.alpha < d


def test_golden_ratio_fit():
    fit = u1_alpha(1)
    assert abs(fit.alpha - (1 + math.sqrt(5)) / 2) < 1e-4
    assert fit.residual < 1e-10


def test_u2_fits():
    t1 = dimension_table(graph_of(u2_model(1)), 1000)
    f1 = fit_alpha(t1, (100, 1000))
    assert abs(f1.alpha - 2) < 1e-12 and f1.residual <= 1e-12
    t2 = dimension_table(graph_of(u2_model(2)), 850)
    assert abs(fit_alpha(t2, (100, 850)).alpha - 2.2469796) < 1e-4


def test_fit_window_validation():
    t = dimension_table(graph_of(u1_model(1)), 50)
    with pytest.raises(ValueError):
        fit_alpha(t, (10, 18))
    with pytest.raises(ValueError):
        fit_alpha(t, (10, 80))
    flat = DimensionTable(1, [[1, 1]] * 30)
    with pytest.raises(ValueError):
        fit_alpha(flat, (0, 29))


def test_saturation_scan():
    scan = alpha_saturation_scan(range(1, 9))
    alphas = [a for _, a, _ in scan.rows]
    assert all(b > a for a, b in zip(alphas, alphas[1:]))
    assert max(alphas) < 2


def test_u1_alpha_closed_form():
    # transfer matrix of the link-frame graph is a path with loops; its top eigenvalue
    for nbar in (1, 2, 3):
        assert abs(u1_alpha(nbar).alpha - 2 * math.cos(math.pi / (2 * nbar + 3))) < 1e-6


def test_csv_and_json_outputs():
    t = dimension_table(graph_of(u1_model(1)), 3)
    lines = t.to_csv().split("\r\n")
    assert lines[0] == "ell,D_0,D_1,D_total" and lines[4] == "3,5,3,8"
    fit = fit_alpha(dimension_table(graph_of(u1_model(1)), 40), (10, 40))
    data = json.loads(fit.to_json())
    assert set(data) == {"alpha", "intercept", "residual", "slope", "window"}


@pytest.mark.parametrize("spec", [u1_model(1), u1_model(2), u1_model(5), u2_model(1), u2_model(2)],
                         ids=["u1n1", "u1n2", "u1n5", "u2n1", "u2n2"])
def test_fit_matches_transfer_matrix_eigenvalue(spec):
    import numpy as np
    g = graph_of(spec)
    T = np.zeros((g.nbar + 1, g.nbar + 1))
    for s, t in g.arrows[0]:
        T[t, s] += 1
    lam = max(abs(np.linalg.eigvals(T)))
    fit = fit_alpha(dimension_table(g, 1000), (100, 1000))
    assert abs(fit.alpha - lam) < 1e-6
