"""Resolutions, circles, faces and configurations.

Planar data is carried as a rotation system.  A circle is stored as a
cyclic sequence of arc endpoints in its traversal direction, and every
endpoint records on which side of the traversal its arc leaves
(``+1`` left, ``-1`` right).  This is a complete description of a
connected configuration up to orientation-preserving homeomorphism of
the sphere, and it is all that surgery, duality and classification need.

Resolution conventions, at a crossing with ports ``0..3`` counterclockwise
(port 0 = incoming under-strand):

* 0-resolution pairs ports ``(0,1)`` and ``(2,3)``;
* 1-resolution pairs ports ``(0,3)`` and ``(1,2)``;
* the 0-resolution surgery arc runs from the ``(0,1)`` strand to the
  ``(2,3)`` strand when the decoration bit is 0, and backwards when it is 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .diagram import LinkDiagram

LEFT, RIGHT = 1, -1

_PARTNER = (
    (1, 0, 3, 2),  # 0-resolution
    (3, 2, 1, 0),  # 1-resolution
)


def weight(I: int) -> int:
    return bin(I).count("1")


def bits(I: int, n: int) -> str:
    """Resolution as a bit string, crossing 0 first."""
    return "".join("1" if I >> i & 1 else "0" for i in range(n))


@dataclass(frozen=True)
class CircleSet:
    """Circles of one resolution.

    ``passages[c]`` lists the crossing sites circle ``c`` runs through, in
    traversal order, as ``(crossing, entry_port, exit_port)``.  Circles are
    indexed by their minimal edge label; ``edge_circle`` maps edge -> circle.
    """

    resolution: int
    edges: tuple[tuple[int, ...], ...]
    passages: tuple[tuple[tuple[int, int, int], ...], ...]
    edge_circle: dict

    def __len__(self) -> int:
        return len(self.edges)


def resolve(d: LinkDiagram, I: int) -> CircleSet:
    """Smooth every crossing of ``d`` according to the bits of ``I``."""
    if d.n == 0:
        loops = d.free_loops
        return CircleSet(I, tuple(() for _ in range(loops)), tuple(() for _ in range(loops)), {})
    tuples = [c.edges for c in d.crossings]
    ends = d.edge_ends
    seen: set[int] = set()
    raw = []
    for e0 in sorted(ends):
        if e0 in seen:
            continue
        edges, passages = [], []
        e, port = e0, ends[e0][1]
        while True:
            seen.add(e)
            edges.append(e)
            ci, p = port
            q = _PARTNER[I >> ci & 1][p]
            passages.append((ci, p, q))
            e = tuples[ci][q]
            if e == e0:
                break
            a, b = ends[e]
            port = b if a == (ci, q) else a
        raw.append((edges, passages))
    raw.sort(key=lambda r: min(r[0]))
    edge_circle = {}
    for i, (edges, _) in enumerate(raw):
        for e in edges:
            edge_circle[e] = i
    circles = tuple(tuple(r[0]) for r in raw)
    passages = tuple(tuple(r[1]) for r in raw)
    free = tuple(() for _ in range(d.free_loops))
    return CircleSet(I, circles + free, passages + free, edge_circle)


def circle_count(d: LinkDiagram, I: int) -> int:
    """Number of circles in resolution ``I`` (union-find, no planar data)."""
    if d.n == 0:
        return d.free_loops
    parent = {e: e for e in d.edge_ends}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for ci, c in enumerate(d.crossings):
        a, b, cc, dd = c.edges
        if I >> ci & 1:
            pairs = ((a, dd), (b, cc))
        else:
            pairs = ((a, b), (cc, dd))
        for x, y in pairs:
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry
    return len({find(e) for e in parent}) + d.free_loops


def euler_check(d: LinkDiagram, I: int) -> bool:
    """V - E + F = 2 for the planar graph of circles plus 0-surgery arcs.

    Vertices are arc endpoints and crossing sites of arcs; here we use the
    resolution together with every 0-arc, which is connected whenever the
    diagram is, so Euler's formula must give 2.
    """
    if d.n == 0:
        return True
    cs = resolve(d, I)
    zeros = [c for c in range(d.n) if not I >> c & 1]
    conf = _configuration(d, cs, zeros, (0,) * d.n)
    return conf.euler_characteristic() == 2 * conf.graph_components()


@dataclass(frozen=True)
class Face:
    source: int
    target: int
    n: int

    def __post_init__(self):
        if self.source & ~self.target:
            raise ValueError("face source must be <= target coordinatewise")
        if self.source == self.target:
            raise ValueError("face must have dimension >= 1")

    @property
    def changed(self) -> tuple[int, ...]:
        diff = self.target & ~self.source
        return tuple(i for i in range(self.n) if diff >> i & 1)

    @property
    def dim(self) -> int:
        return weight(self.target) - weight(self.source)


@dataclass
class Configuration:
    """Circles plus oriented arcs, as a rotation system.

    Endpoint ``2*i`` is the tail and ``2*i+1`` the head of arc ``i``.
    ``circles[c]`` is the cyclic endpoint sequence of circle ``c``;
    ``side[e]`` is ``LEFT``/``RIGHT``.  ``names`` optionally carries the
    circle indices in the ambient resolution; ``arc_names`` the crossing
    index of each arc.
    """

    circles: list[list[int]]
    side: dict
    n_arcs: int
    names: list[int] | None = None
    arc_names: list[int] | None = None
    after_edge: dict | None = None

    @property
    def dim(self) -> int:
        return self.n_arcs

    def circle_of(self) -> dict:
        return {e: c for c, seq in enumerate(self.circles) for e in seq}

    def arc_circles(self, i: int) -> tuple[int, int]:
        """(tail circle, head circle) of arc ``i``."""
        where = self.circle_of()
        return where[2 * i], where[2 * i + 1]

    def active(self) -> list[int]:
        return [c for c, seq in enumerate(self.circles) if seq]

    def passive(self) -> list[int]:
        return [c for c, seq in enumerate(self.circles) if not seq]

    def is_split(self, i: int) -> bool:
        t, h = self.arc_circles(i)
        return t == h

    def graph_components(self) -> int:
        """Connected components of the circles-and-arcs graph."""
        parent = list(range(len(self.circles)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        where = self.circle_of()
        for i in range(self.n_arcs):
            a, b = find(where[2 * i]), find(where[2 * i + 1])
            parent[a] = b
        return len({find(c) for c in range(len(self.circles))})

    def euler_characteristic(self) -> int:
        """V - E + F summed over the components of the circles-and-arcs graph.

        Endpoints are the vertices (each of degree 3); a circle without
        endpoints is its own sphere component and contributes 2.
        """
        perm = self._face_permutation()
        seen = set()
        faces = 0
        for x in perm:
            if x in seen:
                continue
            faces += 1
            while x not in seen:
                seen.add(x)
                x = perm[x]
        empty = sum(1 for seq in self.circles if not seq)
        return 2 * self.n_arcs - 3 * self.n_arcs + faces + 2 * empty

    def _face_permutation(self) -> dict:
        # darts at endpoint e: ("s", e) forward along the circle,
        # ("b", e) backward, ("a", e) along the arc
        nxt, prv = {}, {}
        for seq in self.circles:
            for k, e in enumerate(seq):
                nxt[e] = seq[(k + 1) % len(seq)]
                prv[e] = seq[k - 1]
        rot = {}
        for e in nxt:
            if self.side[e] == LEFT:
                rot[e] = [("s", e), ("a", e), ("b", e)]
            else:
                rot[e] = [("s", e), ("b", e), ("a", e)]

        def twin(dart):
            kind, e = dart
            if kind == "s":
                return ("b", nxt[e])
            if kind == "b":
                return ("s", prv[e])
            return ("a", e ^ 1)

        perm = {}
        for order in rot.values():
            for dart in order:
                t = twin(dart)
                ring = rot[t[1]]
                perm[dart] = ring[(ring.index(t) - 1) % 3]
        return perm


def _configuration(d: LinkDiagram, cs: CircleSet, arcs: Sequence[int], t: Sequence[int]) -> Configuration:
    """Configuration of the circles ``cs`` with the 0-arcs at crossings ``arcs``."""
    index = {c: i for i, c in enumerate(arcs)}
    circles: list[list[int]] = []
    side = {}
    after = {}
    tuples = [c.edges for c in d.crossings]
    for passages in cs.passages:
        seq = []
        for ci, p, q in passages:
            i = index.get(ci)
            if i is None:
                continue
            if {p, q} == {0, 1}:
                e = 2 * i + (1 if t[ci] else 0)
            else:
                e = 2 * i + (0 if t[ci] else 1)
            seq.append(e)
            side[e] = LEFT if q == (p + 1) % 4 else RIGHT
            after[e] = tuples[ci][q]
        circles.append(seq)
    return Configuration(circles, side, len(arcs), list(range(len(circles))), list(arcs), after)


def face_configuration(d: LinkDiagram, face: Face, t: Sequence[int], circles: CircleSet | None = None) -> Configuration:
    """The configuration C(I, J, t): circles of I plus the oriented 0-arcs of the changed crossings."""
    cs = circles if circles is not None else resolve(d, face.source)
    return _configuration(d, cs, face.changed, t)


def active_part(c: Configuration) -> Configuration:
    keep = [k for k, seq in enumerate(c.circles) if seq]
    names = [c.names[k] for k in keep] if c.names is not None else keep
    return Configuration([list(c.circles[k]) for k in keep], dict(c.side), c.n_arcs, names, c.arc_names, c.after_edge)


def reverse(c: Configuration) -> Configuration:
    """Reverse every arc (swap tail and head)."""
    circles = [[e ^ 1 for e in seq] for seq in c.circles]
    side = {e ^ 1: s for e, s in c.side.items()}
    after = {e ^ 1: x for e, x in c.after_edge.items()} if c.after_edge else None
    return Configuration(circles, side, c.n_arcs, c.names, c.arc_names, after)


def mirror(c: Configuration) -> Configuration:
    """Reverse the orientation of the sphere: every side flips."""
    return Configuration([list(seq) for seq in c.circles], {e: -s for e, s in c.side.items()}, c.n_arcs, c.names, c.arc_names, c.after_edge)


def is_disconnected(c: Configuration) -> bool:
    """Whether the graph of active circles and arcs is disconnected."""
    a = active_part(c)
    return bool(a.circles) and a.graph_components() > 1


@dataclass
class Surgery:
    """Result of surgery along every arc of a configuration.

    ``dual`` is the dual configuration (ending circles with dual arcs);
    ``segment_circle[e]`` is the ending circle that contains the piece of
    starting circle right after endpoint ``e``; ``passive_map`` sends each
    passive starting circle to its ending circle index.
    """

    dual: Configuration
    segment_circle: dict
    passive_map: dict


def surgery(c: Configuration) -> Surgery:
    nxt = {}
    for seq in c.circles:
        for k, e in enumerate(seq):
            nxt[e] = seq[(k + 1) % len(seq)]
    # half points: (e, +1) just after e, (e, -1) just before e
    band = {}
    band_kind = {}
    for i in range(c.n_arcs):
        u, v = 2 * i, 2 * i + 1
        if c.side[u] == LEFT:
            ur, ul = (u, 1), (u, -1)
        else:
            ur, ul = (u, -1), (u, 1)
        if c.side[v] == LEFT:
            vr, vl = (v, -1), (v, 1)
        else:
            vr, vl = (v, 1), (v, -1)
        band[ur], band[vr] = vr, ur
        band[ul], band[vl] = vl, ul
        band_kind[ur] = band_kind[vr] = ("R", i)
        band_kind[ul] = band_kind[vl] = ("L", i)

    seen = set()
    new_circles: list[list[int]] = []
    new_side = {}
    segment_circle = {}
    for start in sorted(band):
        if start in seen:
            continue
        idx = len(new_circles)
        seq = []
        h = start
        # walk: at half point h we are about to cross the band edge
        while h not in seen:
            seen.add(h)
            g = band[h]
            seen.add(g)
            kind, i = band_kind[h]
            # traversing the band edge from h's end to g's end
            from_tail = h[0] == 2 * i
            if kind == "R":
                e = 2 * i  # dual tail sits on the right band edge
                s = LEFT if from_tail else RIGHT
            else:
                e = 2 * i + 1
                s = RIGHT if from_tail else LEFT
            seq.append(e)
            new_side[e] = s
            # continue along the starting circle away from g
            pt, direction = g
            if direction == 1:
                segment_circle[pt] = idx
                h = (nxt[pt], -1)
            else:
                prv = _prev(c, pt)
                segment_circle[prv] = idx
                h = (prv, 1)
        new_circles.append(seq)
    passive_map = {}
    for k, seq in enumerate(c.circles):
        if not seq:
            passive_map[k] = len(new_circles)
            new_circles.append([])
    dual = Configuration(new_circles, new_side, c.n_arcs, None, c.arc_names)
    return Surgery(dual, segment_circle, passive_map)


def _prev(c: Configuration, e: int) -> int:
    for seq in c.circles:
        if e in seq:
            k = seq.index(e)
            return seq[k - 1]
    raise KeyError(e)


def dual(c: Configuration) -> Configuration:
    return surgery(c).dual


def canonical_code(c: Configuration, oriented: bool = True) -> tuple:
    """Isomorphism invariant of a configuration.

    Two configurations get equal codes iff an orientation preserving
    homeomorphism of the sphere carries one to the other (respecting arc
    orientations when ``oriented``).  Components of a disconnected
    configuration are coded separately and sorted, which treats them as
    lying in disjoint discs.
    """
    circles = [seq for seq in c.circles if seq]
    where = {e: k for k, seq in enumerate(circles) for e in seq}
    comps: dict[int, list[int]] = {}
    parent = list(range(len(circles)))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e, k in where.items():
        a, b = find(k), find(where[e ^ 1])
        parent[a] = b
    for e in where:
        comps.setdefault(find(where[e]), []).append(e)
    codes = []
    for ends in comps.values():
        codes.append(min(tuple(_code_from(circles, where, c.side, s, oriented)) for s in ends))
    passive = sum(1 for seq in c.circles if not seq)
    return (passive, tuple(sorted(codes)))


def _code_from(circles, where, side, start, oriented):
    label = {}
    out = []
    queue = [start]
    done = set()

    def lab(e):
        if e not in label:
            label[e] = len(label)
            label[e ^ 1] = len(label)
        return label[e]

    while queue:
        entry = queue.pop(0)
        k = where[entry]
        if k in done:
            continue
        done.add(k)
        seq = circles[k]
        j = seq.index(entry)
        flip = side[entry] != LEFT
        if flip:
            order = [seq[(j - m) % len(seq)] for m in range(len(seq))]
        else:
            order = [seq[(j + m) % len(seq)] for m in range(len(seq))]
        enc = []
        for e in order:
            s = side[e] if not flip else -side[e]
            tail = (e % 2 == 0) if oriented else True
            enc.append((lab(e), s, tail))
            if where[e ^ 1] not in done:
                queue.append(e ^ 1)
        out.append(tuple(enc))
    return out
