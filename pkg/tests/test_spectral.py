from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from szabo_ss import fixtures as F
from szabo_ss.complex import ChainComplex, build_complex
from szabo_ss.diagram import parse_pd, unknot
from szabo_ss.spectral import (
    CancellationState,
    Page,
    PoincarePolynomial,
    cancel,
    compute_pages,
    conjectured_torus_poly,
    khovanov_oracle,
    persistence_pairs,
    tensor_pages,
    twin_prediction,
)

P = PoincarePolynomial.parse
TREFOIL = parse_pd("X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]")


def _complex(h, q, edges) -> ChainComplex:
    n = len(h)
    src = np.array([s for s, _ in edges], np.int64)
    tgt = np.array([t for _, t in edges], np.int64)
    zeros = np.zeros(n, np.int64)
    return ChainComplex(np.array(h, np.int64), np.array(q, np.int64), src, tgt, zeros, zeros.copy())


# -- polynomials --------------------------------------------------------------------


def test_polynomial_formats():
    p = P("q^{5}+t^{3}q^{11}+2t^{-1}q^{-3}")
    assert p.format() == "2t^{-1}q^{-3}+q^{5}+t^{3}q^{11}"
    assert str(p) == "2t^-1q^-3+q^5+t^3q^11"
    assert P(str(p)) == p
    assert P("0") == PoincarePolynomial() and str(PoincarePolynomial()) == "0"
    assert P("1+tq^2").terms == {(0, 0): 1, (1, 2): 1}


@given(st.dictionaries(st.tuples(st.integers(-9, 9), st.integers(-30, 30)), st.integers(1, 4), max_size=8))
def test_polynomial_round_trip(terms):
    p = PoincarePolynomial(terms)
    assert P(p.format()) == p
    assert P(str(p)) == p
    assert p.mirror().mirror() == p
    assert p.total() == sum(terms.values())


def test_polynomial_arithmetic():
    a, b = P("1+tq^2"), P("q^-1")
    assert a * b == P("q^-1+tq")
    assert a + a == P("2+2tq^2")
    assert a.shift(1, 2) == P("tq^2+t^2q^4")


# -- cancellation ---------------------------------------------------------------------


def test_cancel_zigzag():
    # a -> x, b -> x, b -> y: cancelling a -> x leaves b -> y
    c = _complex([0, 0, 1, 1], [0, 0, 2, 2], [(0, 2), (1, 2), (1, 3)])
    s = CancellationState(c)
    cancel(s, 0, 2)
    assert s.alive == {1, 3}
    assert s.out[1] == {3}


def test_cancel_creates_and_removes_entries():
    # u -> l, k -> l, k -> v, u -> v: the induced u -> v cancels the existing one
    c = _complex([0, 0, 1, 1], [0, 0, 2, 2], [(0, 2), (1, 2), (1, 3), (0, 3)])
    s = CancellationState(c)
    cancel(s, 1, 2)
    assert s.out[0] == set() and not s.has_differential()
    with pytest.raises(ValueError):
        s.cancel(0, 1)


def _random_filtered(draw):
    """A complex isomorphic, through a bigrading-preserving change of basis,
    to a direct sum of pairs with known lengths; returns it with its pages."""
    n_pairs = draw(st.integers(0, 12))
    n_free = draw(st.integers(0, 6))
    h, q, pairs = [], [], []
    for _ in range(n_pairs):
        a = draw(st.integers(0, 4))
        gap = draw(st.integers(1, 3))
        delta = draw(st.sampled_from([0, 2, 4]))
        i = len(h)
        h += [a, a + gap]
        q += [2 * a + delta, 2 * (a + gap) + delta - 2]
        pairs.append((i, i + 1, gap))
    for _ in range(n_free):
        a = draw(st.integers(0, 6))
        h.append(a)
        q.append(2 * a + draw(st.sampled_from([0, 2, 4])))
    n = len(h)
    M = np.zeros((n, n), np.uint8)
    for s, t, _ in pairs:
        M[t, s] = 1
    grade = list(zip(h, q))
    for _ in range(draw(st.integers(0, 3 * n + 1))):
        i = draw(st.integers(0, max(n - 1, 0)))
        j = draw(st.integers(0, max(n - 1, 0)))
        if n and i != j and grade[i] == grade[j]:
            E = np.eye(n, dtype=np.uint8)
            E[j, i] = 1
            M = (E @ M @ E) % 2
    t, s = np.nonzero(M)
    c = _complex(h, q, list(zip(s.tolist(), t.tolist())))
    top = max([g for _, _, g in pairs], default=0)
    pages = []
    for k in range(top + 2):
        alive = [True] * n
        for a, b, g in pairs:
            if g < max(k, 1):
                alive[a] = alive[b] = False
        pages.append(Page(k, _tally([grade[g] for g in range(n) if alive[g]])))
    return c, pages


def _tally(grades):
    out: dict = {}
    for g in grades:
        out[g] = out.get(g, 0) + 1
    return out


@st.composite
def filtered_complexes(draw):
    return _random_filtered(draw)


@given(filtered_complexes(), st.sampled_from(["minfill", "first"]))
def test_pages_of_random_filtered_complexes(data, strategy):
    c, expected = data
    assert (c.delta[c.tgt] - c.delta[c.src] == -2).all()
    for seq in (compute_pages(c, "cancel", strategy), compute_pages(c, "persistence")):
        top = max(len(expected), len(seq.pages))
        assert [seq.page(k).ranks for k in range(top)] == [
            (expected[k] if k < len(expected) else expected[-1]).ranks for k in range(top)]


@given(filtered_complexes())
def test_total_rank_non_increasing(data):
    c, _ = data
    r = compute_pages(c).ranks()
    assert all(a >= b for a, b in zip(r, r[1:]))


def test_persistence_pairs_are_involution():
    c = build_complex(F.get("8_19").diagram(), part="reduced")
    p = persistence_pairs(c)
    paired = np.flatnonzero(p >= 0)
    assert (p[p[paired]] == paired).all()
    assert (np.abs(c.h[p[paired]] - c.h[paired]) >= 1).all()


# -- knots ------------------------------------------------------------------------


def test_unknot_pages():
    seq = compute_pages(build_complex(unknot(), part="reduced"))
    assert seq.collapse == 1
    assert seq.page(2).poly() == P("q^-1")
    assert compute_pages(build_complex(unknot())).page(5).poly() == P("q^-1+q")


@pytest.mark.parametrize("name,ranks", [("8_19", [5, 3, 3]), ("10_124", [7, 3, 1]), ("T(3,7)", [9, 5, 3])])
def test_page_ranks(name, ranks):
    seq = compute_pages(build_complex(F.get(name).diagram(), part="reduced"))
    assert [seq.page(k).rank for k in (2, 3, 4)] == ranks


def test_10_124_collapses_to_one_generator():
    seq = compute_pages(build_complex(F.get("10_124").diagram(), part="reduced"))
    assert seq.page(4).poly().format() == "q^{7}"
    assert seq.infinity.rank == 1


def test_t37_fourth_page():
    seq = compute_pages(build_complex(F.get("T(3,7)").diagram(), part="reduced"))
    assert str(seq.page(4).poly()) == "q^11+t^8q^23+t^9q^27"


@pytest.mark.parametrize("name", ["3_1", "4_1", "8_19", "T(3,3)", "10_132"])
def test_cancel_and_persistence_agree(name):
    c = build_complex(F.get(name).diagram(), part="reduced")
    a, b = compute_pages(c, "cancel"), compute_pages(c, "persistence")
    assert a.pages == b.pages


def test_oracle_small_cases():
    assert khovanov_oracle(unknot()).rank == 2
    assert khovanov_oracle(TREFOIL, "reduced").rank == 3
    assert khovanov_oracle(F.get("4_1").diagram(), "reduced").poly().total() == 5


def test_oracle_matches_second_page():
    d = F.get("T(3,4)").diagram()
    for part in ("full", "reduced"):
        assert compute_pages(build_complex(d, part=part)).page(2).poly() == khovanov_oracle(d, part).poly()


def test_twin_and_tensor_helpers():
    p = Page(2, {(0, 1): 1})
    assert twin_prediction(p).poly() == P("q+q^3")
    assert tensor_pages(p, p, qshift=1).poly() == P("q^3")


# -- torus conjecture --------------------------------------------------------------------


def test_conjecture_small_values():
    assert conjectured_torus_poly(5, 4).total() == 1
    assert conjectured_torus_poly(4, 2).total() == 5
    assert conjectured_torus_poly(2, 3) == P("q+t^2q^5+t^3q^7")
    # j = 1: f_1 = 1 contributes p^2 (8 terms) and the shifted p^2_0 two more
    assert conjectured_torus_poly(8, 2).total() == 1 + 8 + 2


@pytest.mark.parametrize("n", [4, 5, 7, 8])
def test_conjecture_matches_tables_for_knots(n):
    rows = F.table_polys(f"T(3,{n})")
    for k, poly in rows.items():
        assert conjectured_torus_poly(n, k) == poly


def test_conjecture_rejects_bad_arguments():
    with pytest.raises(ValueError):
        conjectured_torus_poly(1, 2)
    with pytest.raises(ValueError):
        conjectured_torus_poly(5, 5)
