from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from szabo_ss import fixtures as F
from szabo_ss.cube import (
    Face,
    active_part,
    circle_count,
    dual,
    euler_check,
    face_configuration,
    is_disconnected,
    mirror,
    resolve,
    reverse,
    surgery,
)
from szabo_ss.diagram import mirror_diagram, parse_pd, random_decoration, unknot

TREFOIL = parse_pd("X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]")


def test_trefoil_resolutions_hand_traced():
    # 0-smoothings pair (1,4), (2,5), (3,6); 1-smoothings give 1-5-3 and 2-4-6
    assert len(resolve(TREFOIL, 0b000)) == 3
    assert len(resolve(TREFOIL, 0b111)) == 2
    right = mirror_diagram(TREFOIL)
    assert len(resolve(right, 0b000)) == 2
    assert len(resolve(right, 0b111)) == 3


def test_unknot_resolution():
    assert circle_count(unknot(), 0) == 1


def test_every_segment_on_one_circle():
    d = F.get("8_19").diagram()
    for I in range(1 << d.n):
        cs = resolve(d, I)
        seen = [e for circ in cs.edges for e in circ]
        assert sorted(seen) == sorted(d.edges)
        assert all(cs.edge_circle[e] == k for k, circ in enumerate(cs.edges) for e in circ)


@pytest.mark.parametrize("name", ["3_1", "4_1c", "5_2", "T(3,3)", "8_19"])
def test_euler_formula(name):
    d = F.get(name).diagram()
    assert all(euler_check(d, I) for I in range(1 << d.n))


def _faces(d, max_dim=None):
    n = d.n
    for I in range(1 << n):
        free = ((1 << n) - 1) & ~I
        sub = free
        while sub:
            J = I | sub
            sub = (sub - 1) & free
            f = Face(I, J, n)
            if max_dim is None or f.dim <= max_dim:
                yield f


@pytest.mark.parametrize("name", ["3_1", "4_1", "T(2,4)"])
def test_one_faces_change_circle_count_by_one(name):
    d = F.get(name).diagram()
    for f in _faces(d, 1):
        assert abs(circle_count(d, f.target) - circle_count(d, f.source)) == 1


@pytest.mark.parametrize("name", ["3_1", "4_1", "5_2", "T(3,3)"])
def test_surgery_recovers_target_resolution(name):
    d = F.get(name).diagram()
    t = random_decoration(d, 1)
    for f in _faces(d):
        rI, rJ = resolve(d, f.source), resolve(d, f.target)
        conf = face_configuration(d, f, t, rI)
        sur = surgery(conf)
        assert len(sur.dual.circles) == len(rJ)
        image = {}
        for e, y in sur.segment_circle.items():
            image.setdefault(y, set()).add(rJ.edge_circle[conf.after_edge[e]])
        assert all(len(v) == 1 for v in image.values())
        targets = {next(iter(v)) for v in image.values()}
        targets |= {rJ.edge_circle[rI.edges[k][0]] for k in sur.passive_map}
        assert len(targets) == len(rJ)


def test_face_validation():
    with pytest.raises(ValueError):
        Face(0b01, 0b10, 2)
    with pytest.raises(ValueError):
        Face(0b01, 0b01, 2)
    f = Face(0b001, 0b111, 3)
    assert f.changed == (1, 2) and f.dim == 2


def _configs(d, t, max_dim=3):
    for f in _faces(d, max_dim):
        yield face_configuration(d, f, t, resolve(d, f.source))


@given(st.integers(0, 7))
def test_involutions(seed):
    d = F.get("4_1").diagram()
    t = random_decoration(d, seed)
    for c in _configs(d, t):
        assert reverse(reverse(c)) == c
        assert mirror(mirror(c)) == c
        a = active_part(c)
        assert active_part(a) == a
        assert all(a.circles)


def test_passive_circles():
    d = F.get("5_2").diagram()
    for c in _configs(d, (0,) * d.n, 2):
        touched = {k for k, seq in enumerate(c.circles) if seq}
        assert set(range(len(c.circles))) - touched == set(c.passive())
        assert not is_disconnected(c) or c.dim >= 2


def test_dual_of_split_is_join():
    d = TREFOIL
    for c in _configs(d, (0, 0, 0), 1):
        a = active_part(c)
        da = dual(a)
        assert len(da.circles) == len(surgery(a).dual.circles)
        assert {len(a.circles), len(da.circles)} == {1, 2}


def test_disconnected_examples():
    d = F.get("T(3,3)").diagram()
    found = False
    for c in _configs(d, (0,) * d.n, 2):
        if is_disconnected(c):
            found = True
            assert active_part(c).graph_components() == 2
    assert found
