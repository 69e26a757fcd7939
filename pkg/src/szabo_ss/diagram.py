"""Oriented planar link diagrams in PD notation.

A crossing ``X[a,b,c,d]`` lists its four edge ends counterclockwise,
starting from the incoming under-strand (KnotTheory convention).  The
under-strand therefore runs ``a -> c``; the over-strand runs either
``d -> b`` (positive crossing) or ``b -> d`` (negative crossing).

Diagrams are immutable.  A diagram may also carry crossingless unknotted
components (``free_loops``), which is how the 0-crossing unknot is
represented.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class DiagramError(ValueError):
    """Raised for malformed or non-planar diagram input."""


@dataclass(frozen=True)
class Crossing:
    edges: tuple[int, int, int, int]
    sign: int

    @property
    def over_in(self) -> int:
        """Port index (1 or 3) where the over-strand enters."""
        return 3 if self.sign > 0 else 1


@dataclass(frozen=True)
class BasePoint:
    edge: int
    component: int


@dataclass(frozen=True)
class LinkDiagram:
    crossings: tuple[Crossing, ...]
    components: tuple[tuple[int, ...], ...]
    free_loops: int = 0
    # edge label -> ((crossing, port) where the edge starts, (crossing, port) where it ends)
    edge_ends: dict = field(default=None, compare=False, repr=False, hash=False)

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for c in self.crossings if c.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for c in self.crossings if c.sign < 0)

    @property
    def writhe(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def num_components(self) -> int:
        return len(self.components) + self.free_loops

    @property
    def edges(self) -> list[int]:
        return sorted(e for comp in self.components for e in comp)

    def component_of(self, edge: int) -> int:
        for i, comp in enumerate(self.components):
            if edge in comp:
                return i
        raise DiagramError(f"edge {edge} not in diagram")

    def base_point(self, edge: int | None = None) -> BasePoint:
        """Base point on ``edge``; defaults to the lowest edge of component 0."""
        if self.n == 0:
            return BasePoint(0, 0)
        if edge is None:
            edge = min(self.components[0])
        return BasePoint(edge, self.component_of(edge))

    def pd_string(self) -> str:
        return " ".join("X[%d,%d,%d,%d]" % c.edges for c in self.crossings)

    def to_json(self, decoration: Sequence[int] | None = None) -> str:
        obj = {
            "crossings": [list(c.edges) for c in self.crossings],
            "signs": [c.sign for c in self.crossings],
            "decoration": list(decoration) if decoration is not None else [0] * self.n,
        }
        if self.free_loops:
            obj["free_loops"] = self.free_loops
        return json.dumps(obj)


def _ports(tuples: Sequence[tuple[int, int, int, int]]) -> dict[int, list[tuple[int, int]]]:
    ports: dict[int, list[tuple[int, int]]] = {}
    for ci, t in enumerate(tuples):
        for pos, e in enumerate(t):
            ports.setdefault(e, []).append((ci, pos))
    return ports


def _check_planar(tuples: Sequence[tuple[int, int, int, int]], ports) -> None:
    # darts are ports; alpha = other end of the same edge, sigma = ccw successor
    n = len(tuples)
    darts = [(ci, p) for ci in range(n) for p in range(4)]

    def alpha(d):
        e = tuples[d[0]][d[1]]
        a, b = ports[e]
        return b if d == a else a

    seen = set()
    faces = 0
    for d in darts:
        if d in seen:
            continue
        faces += 1
        x = d
        while x not in seen:
            seen.add(x)
            y = alpha(x)
            x = (y[0], (y[1] - 1) % 4)
    # graph components
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e, ends in ports.items():
        parent[find(ends[0][0])] = find(ends[1][0])
    ncomp = len({find(i) for i in range(n)})
    if n - 2 * n + faces != 2 * ncomp:
        raise DiagramError("PD code is not planar")


def from_tuples(tuples: Iterable[Sequence[int]], free_loops: int = 0) -> LinkDiagram:
    """Build a diagram from PD 4-tuples, recovering orientations and signs."""
    tuples = [tuple(int(v) for v in t) for t in tuples]
    if not tuples:
        if free_loops <= 0:
            raise DiagramError("empty diagram")
        return LinkDiagram((), (), free_loops, {})
    for t in tuples:
        if len(t) != 4:
            raise DiagramError(f"crossing {t} does not have four edge ends")
    ports = _ports(tuples)
    for e, ends in ports.items():
        if len(ends) != 2:
            raise DiagramError(f"edge label {e} appears {len(ends)} times (expected 2)")
    _check_planar(tuples, ports)

    def other(port):
        a, b = ports[tuples[port[0]][port[1]]]
        return b if port == a else a

    # strands through a crossing pair ports (0,2) and (1,3); walk components
    visited: set[tuple[int, int]] = set()
    raw_components: list[list[tuple[int, int]]] = []
    for ci in range(len(tuples)):
        for start in (0, 1):
            if (ci, start) in visited:
                continue
            # a walk is a list of (crossing, entry port)
            walk = []
            port = (ci, start)
            while port not in visited:
                visited.add(port)
                exit_port = (port[0], (port[1] + 2) % 4)
                visited.add(exit_port)
                walk.append(port)
                port = other(exit_port)
            raw_components.append(walk)

    components = []
    # orientation: an under passage enters at port 0
    for walk in raw_components:
        forward = None
        for ci, p in walk:
            if p % 2 == 0:
                forward = p == 0
                break
        if forward is None:
            # only over passages: follow increasing edge labels
            labels = [tuples[ci][(p + 2) % 4] for ci, p in walk]
            ups = sum(1 for a, b in zip(labels, labels[1:] + labels[:1]) if b == a + 1)
            downs = sum(1 for a, b in zip(labels, labels[1:] + labels[:1]) if a == b + 1)
            forward = ups >= downs
        if not forward:
            walk = [(ci, (p + 2) % 4) for ci, p in reversed(walk)]
        components.append(walk)

    over_in = {}
    for walk in components:
        for ci, p in walk:
            if p % 2 == 1:
                over_in[ci] = p
    crossings = []
    for ci, t in enumerate(tuples):
        sign = 1 if over_in[ci] == 3 else -1
        crossings.append(Crossing(t, sign))

    comp_edges = []
    edge_ends = {}
    for walk in components:
        edges = []
        for ci, p in walk:
            out_port = (ci, (p + 2) % 4)
            e = tuples[ci][out_port[1]]
            edges.append(e)
            edge_ends[e] = (out_port, other(out_port))
        # canonical start: lowest label
        k = edges.index(min(edges))
        comp_edges.append(tuple(edges[k:] + edges[:k]))
    order = sorted(range(len(comp_edges)), key=lambda i: min(comp_edges[i]))
    return LinkDiagram(tuple(crossings), tuple(comp_edges[i] for i in order), free_loops, edge_ends)


_PD_TUPLE = re.compile(r"X\s*[\[\(]\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*[\]\)]")


def parse_pd(text: str) -> LinkDiagram:
    """Parse ``"X[1,4,2,5] X[3,6,4,1] ..."`` (commas/whitespace/PD[...] wrapper allowed).

    A plain nested list such as ``[[1,4,2,5],[3,6,4,1],...]`` is accepted too.
    """
    text = text.strip()
    if not text:
        raise DiagramError("empty input")
    tuples = [tuple(int(g) for g in m.groups()) for m in _PD_TUPLE.finditer(text)]
    if not tuples:
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            raise DiagramError(f"cannot parse PD code: {text[:40]!r}") from None
        if not isinstance(data, list) or not all(isinstance(t, list) for t in data):
            raise DiagramError("PD JSON must be a list of 4-element lists")
        tuples = [tuple(t) for t in data]
        if not tuples:
            raise DiagramError("empty input")
    else:
        leftover = _PD_TUPLE.sub("", text)
        leftover = re.sub(r"PD\s*[\[\(]|[\]\)\s,;]", "", leftover)
        if leftover:
            raise DiagramError(f"unexpected text in PD code: {leftover[:40]!r}")
    for t in tuples:
        if any(v <= 0 for v in t):
            raise DiagramError("edge labels must be positive integers")
    return from_tuples(tuples)


def from_json(text: str) -> tuple[LinkDiagram, tuple[int, ...]]:
    obj = json.loads(text)
    d = from_tuples(obj["crossings"], obj.get("free_loops", 0)) if obj["crossings"] else unknot(obj.get("free_loops", 1))
    if obj.get("signs") is not None and [c.sign for c in d.crossings] != list(obj["signs"]):
        raise DiagramError("signs inconsistent with strand orientations")
    dec = tuple(obj.get("decoration") or [0] * d.n)
    if len(dec) != d.n:
        raise DiagramError("decoration length differs from crossing count")
    return d, dec


def unknot(loops: int = 1) -> LinkDiagram:
    return LinkDiagram((), (), loops, {})


def braid_closure(word: Sequence[int], strands: int) -> LinkDiagram:
    """Closure of a braid word; generator ``i`` (1-based) is a positive crossing
    between positions i and i+1, ``-i`` its inverse."""
    if strands < 1:
        raise DiagramError("need at least one strand")
    if not word:
        return unknot(strands)
    label = 0
    pos_edge = []
    for _ in range(strands):
        label += 1
        pos_edge.append(label)
    first = list(pos_edge)
    pending = []
    for g in word:
        i = abs(g) - 1
        if not 0 <= i < strands - 1:
            raise DiagramError(f"generator {g} out of range for {strands} strands")
        a, b = pos_edge[i], pos_edge[i + 1]
        label += 1
        c = label
        label += 1
        d = label
        # left-in a, right-in b, left-out c, right-out d; strands a->d and b->c
        if g > 0:
            pending.append([b, d, c, a])
        else:
            pending.append([a, b, d, c])
        pos_edge[i], pos_edge[i + 1] = c, d
    # close up: identify final labels with the initial ones
    rename = {last: init for last, init in zip(pos_edge, first)}
    tuples = [[rename.get(e, e) for e in t] for t in pending]
    # untouched strands become free loops
    used = {e for t in tuples for e in t}
    loops = sum(1 for e in first if e not in used)
    # compact labels to 1..2n
    labels = sorted(used)
    index = {e: k + 1 for k, e in enumerate(labels)}
    return from_tuples([[index[e] for e in t] for t in tuples], loops)


def torus_link(p: int, q: int) -> LinkDiagram:
    """Closure of ``(s1 s2 ... s_{p-1})^q`` with positive crossings."""
    if p < 2 or q < 1:
        raise DiagramError("torus_link needs p >= 2 and q >= 1")
    d = braid_closure(list(range(1, p)) * q, p)
    assert d.num_components == math.gcd(p, q)
    return d


def mirror_diagram(d: LinkDiagram) -> LinkDiagram:
    """Switch every crossing (over <-> under); n_+ and n_- swap."""
    if d.n == 0:
        return d
    tuples = []
    for c in d.crossings:
        a, b, cc, dd = c.edges
        tuples.append((dd, a, b, cc) if c.sign > 0 else (b, cc, dd, a))
    return from_tuples(tuples, d.free_loops)


def default_decoration(d: LinkDiagram) -> tuple[int, ...]:
    return (0,) * d.n


def random_decoration(d: LinkDiagram, seed: int) -> tuple[int, ...]:
    rng = random.Random(seed)
    return tuple(rng.randrange(2) for _ in range(d.n))


def connect_sum_diagram(d1: LinkDiagram, p1: BasePoint, d2: LinkDiagram, p2: BasePoint) -> LinkDiagram:
    """Band the components carrying ``p1`` and ``p2`` together at those edges."""
    for d, p in ((d1, p1), (d2, p2)):
        if d.n and p.edge not in d.edge_ends:
            raise DiagramError(f"base point edge {p.edge} not in diagram")
    if d1.n == 0:
        return LinkDiagram(d2.crossings, d2.components, d2.free_loops + d1.free_loops - 1, d2.edge_ends) if d2.n else unknot(d1.free_loops + d2.free_loops - 1)
    if d2.n == 0:
        return LinkDiagram(d1.crossings, d1.components, d1.free_loops + d2.free_loops - 1, d1.edge_ends)
    off = max(d1.edges)
    t1 = [list(c.edges) for c in d1.crossings]
    t2 = [[e + off for e in c.edges] for c in d2.crossings]
    e1, e2 = p1.edge, p2.edge + off
    # e1 now runs from its start into e2's end; a fresh label runs from e2's start into e1's end
    fresh = max(max(d2.edges) + off, off) + 1
    (s1, end1) = d1.edge_ends[p1.edge]
    (s2, end2) = d2.edge_ends[p2.edge]
    t2[end2[0]][end2[1]] = e1
    t2[s2[0]][s2[1]] = fresh
    t1[end1[0]][end1[1]] = fresh
    return from_tuples(t1 + t2, d1.free_loops + d2.free_loops)


def reverse_orientation(d: LinkDiagram) -> LinkDiagram:
    """Reverse every component (re-reading each crossing from its new incoming under end)."""
    if d.n == 0:
        return d
    return from_tuples([(c.edges[2], c.edges[3], c.edges[0], c.edges[1]) for c in d.crossings], d.free_loops)


def reverse_components(d: LinkDiagram, which: Iterable[int]) -> LinkDiagram:
    """Reverse the orientation of the listed components (indices into ``d.components``)."""
    which = set(which)
    for k in which:
        if not 0 <= k < d.num_components:
            raise DiagramError(f"no component {k}")
    if d.n == 0 or not which:
        return d
    flip = {e for k in which for e in d.components[k]}
    tuples = []
    for c in d.crossings:
        t = c.edges
        tuples.append((t[2], t[3], t[0], t[1]) if t[0] in flip else t)
    rename = {}
    for k in which:
        edges = d.components[k]
        under = any(c.edges[0] in edges or c.edges[2] in edges for c in d.crossings
                    if c.edges[0] in flip or c.edges[2] in flip)
        if not under:
            labels = sorted(edges)
            rename.update(zip(reversed(edges), labels))
    if rename:
        tuples = [tuple(rename.get(e, e) for e in t) for t in tuples]
    return from_tuples(tuples, d.free_loops)
