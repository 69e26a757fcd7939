from __future__ import annotations

import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from szabo_ss import fixtures as F
from szabo_ss.complex import (
    ResourceLimitError,
    add_maps,
    build_complex,
    build_point_map,
    compose,
    differential_squares_to_zero,
    edge_homotopy,
    estimate_generators,
    leaves_subcomplex,
    quotient_complex,
    reduced_subcomplex,
    same_map,
    tensor_complex,
    xor_reduce,
)
from szabo_ss.cube import resolve
from szabo_ss.diagram import parse_pd, random_decoration, torus_link, unknot

TREFOIL = parse_pd("X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]")


def test_unknot_complex():
    c = build_complex(unknot())
    assert len(c) == 2 and c.n_entries == 0
    assert sorted(c.q.tolist()) == [-1, 1]
    r = build_complex(unknot(), part="reduced")
    assert len(r) == 1 and (int(r.h[0]), int(r.q[0])) == (0, -1)
    assert len(build_complex(unknot(), part="quotient")) == 1


def test_trefoil_generator_count():
    # circle counts: 3 at 000, 2 at weight one, 1 at weight two, 2 at 111
    counts = [len(resolve(TREFOIL, I)) for I in range(8)]
    assert counts == [3, 2, 2, 1, 2, 1, 1, 2]
    c = build_complex(TREFOIL)
    assert len(c) == sum(2 ** k for k in counts) == 30
    assert differential_squares_to_zero(c)


@pytest.mark.parametrize("name", ["3_1", "4_1", "8_19", "10_132", "T(3,3)"])
def test_generator_count_formula(name):
    d = F.get(name).diagram()
    total = sum(2 ** len(resolve(d, I)) for I in range(1 << d.n))
    assert len(build_complex(d)) == total == estimate_generators(d)
    assert len(build_complex(d, part="reduced")) == total // 2


@pytest.mark.parametrize("name", ["3_1", "4_1c", "6_1", "T(2,4)", "T(3,3)", "8_19"])
@pytest.mark.parametrize("variant", ["standard", "mirror"])
@pytest.mark.parametrize("part", ["full", "reduced", "quotient"])
def test_fast_assembly_matches_reference(name, variant, part):
    d = F.get(name).diagram()
    t = random_decoration(d, 5)
    a = build_complex(d, t, variant, part)
    b = build_complex(d, t, variant, part, method="reference")
    assert np.array_equal(a.src, b.src) and np.array_equal(a.tgt, b.tgt)


@pytest.mark.parametrize("name", ["3_1", "5_2", "8_19", "T(3,3)"])
def test_degrees_of_every_term(name):
    d = F.get(name).diagram()
    c = build_complex(d, random_decoration(d, 1))
    dh = c.h[c.tgt] - c.h[c.src]
    dq = c.q[c.tgt] - c.q[c.src]
    assert (dh >= 1).all()
    assert (dq == 2 * dh - 2).all()
    assert (c.delta[c.tgt] - c.delta[c.src] == -2).all()


@given(st.sampled_from(["3_1", "4_1", "5_2", "6_1", "7_4", "4_1b", "T(2,4)", "T(3,3)"]),
       st.integers(0, 10 ** 6), st.sampled_from(["standard", "mirror"]))
def test_d_squared_zero(name, seed, variant):
    d = F.get(name).diagram()
    assert differential_squares_to_zero(build_complex(d, random_decoration(d, seed), variant))


@given(st.sampled_from(["3_1", "4_1", "5_2", "T(3,3)"]), st.integers(0, 1000))
def test_reduced_and_quotient_partition(name, seed):
    d = F.get(name).diagram()
    c = build_complex(d, random_decoration(d, seed))
    edge = d.edges[seed % len(d.edges)]
    P = d.base_point(edge)
    r = reduced_subcomplex(c, P)
    q = quotient_complex(c, P)
    assert len(r) + len(q) == len(c)
    full = set(zip(c.resolution.tolist(), c.monomial.tolist()))
    assert full == set(zip(r.resolution.tolist(), r.monomial.tolist())) | set(zip(q.resolution.tolist(), q.monomial.tolist()))
    assert not leaves_subcomplex(build_complex(d, c.decoration, basepoint=P))


def test_reduced_subcomplex_matches_direct_build():
    d = F.get("8_19").diagram()
    c = build_complex(d)
    P = d.base_point(d.edges[3])
    a = reduced_subcomplex(c, P)
    b = build_complex(d, part="reduced", basepoint=P)
    key = lambda x: list(zip(x.resolution.tolist(), x.monomial.tolist(), x.h.tolist(), x.q.tolist()))  # noqa: E731
    assert key(a) == key(b)
    assert np.array_equal(a.src, b.src) and np.array_equal(a.tgt, b.tgt)
    qa = quotient_complex(c, P)
    qb = build_complex(d, part="quotient", basepoint=P)
    assert key(qa) == key(qb)
    assert np.array_equal(qa.src, qb.src) and np.array_equal(qa.tgt, qb.tgt)


def test_point_map_on_unknot_is_multiplication_by_x():
    c = build_complex(unknot())
    P = build_point_map(c)
    one = int(np.flatnonzero(c.monomial == 0)[0])
    x = int(np.flatnonzero(c.monomial == 1)[0])
    assert P.adjacency() == [set([x]) if g == one else set() for g in range(2)]


def _chain_map(c, P):
    n = len(c)
    return add_maps(compose(c.src, c.tgt, P.src, P.tgt, n), compose(P.src, P.tgt, c.src, c.tgt, n), size=n)


@pytest.mark.parametrize("bits", range(8))
def test_point_map_is_chain_map_on_trefoil(bits):
    t = tuple(bits >> i & 1 for i in range(3))
    c = build_complex(TREFOIL, t)
    for edge in TREFOIL.edges:
        P = build_point_map(c, TREFOIL.base_point(edge))
        assert _chain_map(c, P)[0].size == 0


@pytest.mark.parametrize("name", ["4_1", "5_2", "T(2,4)"])
def test_point_map_image_and_kernel(name):
    d = F.get(name).diagram()
    c = build_complex(d, random_decoration(d, 4))
    bp = d.base_point()
    P = build_point_map(c, bp)
    marked = reduced_subcomplex(c, bp)
    divisible = set(zip(marked.resolution.tolist(), marked.monomial.tolist()))
    gen = list(zip(c.resolution.tolist(), c.monomial.tolist()))
    assert all(gen[t] in divisible for t in P.tgt.tolist())
    assert not any(gen[s] in divisible for s in P.src.tolist())
    assert _chain_map(c, P)[0].size == 0


@pytest.mark.parametrize("m", range(3))
def test_deformation_identity_on_trefoil(m):
    t = (0, 1, 0)
    c = build_complex(TREFOIL, t)
    t2 = list(t)
    t2[m] ^= 1
    c2 = build_complex(TREFOIL, tuple(t2))
    P, P2, H = build_point_map(c), build_point_map(c2), edge_homotopy(c, m)
    n = len(c)
    rhs = add_maps((P.src, P.tgt), compose(H.src, H.tgt, P.src, P.tgt, n),
                   compose(P.src, P.tgt, H.src, H.tgt, n), size=n)
    assert same_map((P2.src, P2.tgt), rhs, n)


def test_edge_homotopy_support():
    d = F.get("4_1").diagram()
    c = build_complex(d)
    for m in range(d.n):
        H = edge_homotopy(c, m)
        assert H.src.size
        assert all(not (int(c.resolution[s]) >> m & 1) for s in H.src.tolist())
        assert all(int(c.resolution[t]) >> m & 1 for t in H.tgt.tolist())


def test_tensor_with_reduced_unknot_is_identity():
    c = build_complex(TREFOIL, part="reduced")
    u = build_complex(unknot(), part="reduced")
    tc = tensor_complex(u, c, qshift=1)
    assert len(tc) == len(c)
    assert sorted(zip(tc.h.tolist(), tc.q.tolist())) == sorted(zip(c.h.tolist(), c.q.tolist()))
    assert tc.n_entries == c.n_entries


def test_tensor_ranks_multiply_and_square_to_zero():
    a = build_complex(TREFOIL, part="reduced")
    b = build_complex(F.get("4_1").diagram(), part="reduced")
    tc = tensor_complex(a, b)
    assert len(tc) == len(a) * len(b)
    assert differential_squares_to_zero(tc)


def test_resource_limit():
    with pytest.raises(ResourceLimitError, match="generator count"):
        build_complex(torus_link(3, 8), max_generators=10 ** 4)
    with pytest.raises(ResourceLimitError):
        build_complex(torus_link(3, 4), max_generators=1000)


def test_free_loop_alongside_crossings():
    d = dataclasses.replace(TREFOIL, free_loops=1)
    a = build_complex(d)
    b = build_complex(d, method="reference")
    assert len(a) == 60
    assert np.array_equal(a.src, b.src) and np.array_equal(a.tgt, b.tgt)
    assert differential_squares_to_zero(a)


def test_xor_reduce_drops_even_pairs():
    s, t = xor_reduce(np.array([0, 0, 1, 0]), np.array([1, 1, 2, 3]), 4)
    assert list(zip(s.tolist(), t.tolist())) == [(0, 3), (1, 2)]


def test_json_dump():
    c = build_complex(TREFOIL, part="reduced")
    doc = json.loads(c.to_json())
    assert len(doc["generators"]) == len(c)
    assert sum(len(g["targets"]) for g in doc["generators"]) == c.n_entries
    assert c.label(0).count(":") == 1
