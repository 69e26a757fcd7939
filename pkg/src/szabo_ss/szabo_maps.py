"""The configuration maps d_C, the point map P_C and the edge homotopy H_C.

The family rules act on a purely active connected configuration.  Monomials
are bit masks: bit ``i`` of a starting monomial is set when starting
circle ``i`` carries ``x``; bit ``j`` of an ending monomial refers to
circle ``j`` of the surgery result (``Surgery.dual.circles``).
``full_map`` extends a rule to configurations with passive circles, and the
``check_*`` helpers test the structural rules exhaustively on one
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .cube import LEFT, Configuration, Surgery, active_part, mirror, surgery

# Orientation conventions.  They are module level so that experiments can
# compare alternatives; the defaults are the ones that pass every check.
RULES = {
    "A_same_direction": True,
    "B_coherent": True,
    "C_sigma": 1,
    "C_uniform": True,
    "D_from_C": False,
    "E_in_matches_tail_first": True,
}


@dataclass
class ConfigType:
    """Classification of a connected configuration."""

    family: str
    p: int = 0
    q: int = 0
    terms: list = field(default_factory=list)

    @property
    def name(self) -> str:
        if self.family in ("A", "B"):
            return f"{self.family}_{self.p}"
        return f"{self.family}_{self.p},{self.q}"


def _endpoints_by_circle(c: Configuration) -> dict:
    return {e: k for k, seq in enumerate(c.circles) for e in seq}


def genus(c: Configuration, s: int | None = None) -> int:
    """Genus of the surgery cobordism of a connected configuration."""
    t = len(c.circles)
    if s is None:
        s = len(surgery(c).dual.circles)
    return (2 + c.n_arcs - t - s) // 2


def _interleaved(seq: list[int], a: int, b: int) -> bool:
    """Whether chords ``a`` and ``b`` (arc indices) alternate along ``seq``."""
    pos = {e: i for i, e in enumerate(seq)}
    lo, hi = sorted((pos[2 * a], pos[2 * a + 1]))
    inside = (lo < pos[2 * b] < hi) + (lo < pos[2 * b + 1] < hi)
    return inside == 1


def chord_sigma(c: Configuration, a: int, b: int) -> int:
    """Chirality of an interleaved pair of chords on opposite sides of one circle.

    With the circle traversed so that chord ``a`` leaves to the left, this
    is 1 when the head of ``b`` lies in the forward interval from the tail
    of ``a`` to the head of ``a``.  The value does not depend on which chord
    is called ``a``, is unchanged by reversing both arcs and flips under
    mirroring.
    """
    seq = c.circles[0]
    if c.side[2 * a] != LEFT:
        seq = seq[::-1]
    n = len(seq)
    pos = {e: i for i, e in enumerate(seq)}
    ta, ha, hb = pos[2 * a], pos[2 * a + 1], pos[2 * b + 1]
    return int(0 < (hb - ta) % n < (ha - ta) % n)


def _c_shape(c: Configuration):
    """(p, q) if ``c`` is a single circle whose left chords all interleave
    all right chords (both sets nonempty), else None."""
    if len(c.circles) != 1 or c.n_arcs < 2:
        return None
    seq = c.circles[0]
    left = [i for i in range(c.n_arcs) if c.side[2 * i] == LEFT]
    right = [i for i in range(c.n_arcs) if c.side[2 * i] != LEFT]
    if not left or not right:
        return None
    for a in left:
        for b in right:
            if not _interleaved(seq, a, b):
                return None
    return len(left), len(right), left, right


def is_type_c(c: Configuration, chirality: int | None = None) -> tuple[int, int] | None:
    shape = _c_shape(c)
    if shape is None:
        return None
    p, q, left, right = shape
    want = RULES["C_sigma"] if chirality is None else chirality
    if RULES["C_uniform"]:
        for a in left:
            for b in right:
                if chord_sigma(c, a, b) != want:
                    return None
    return p, q


def classify(c: Configuration, sur: Surgery | None = None) -> list[ConfigType]:
    """All families a purely active connected configuration belongs to,
    with the nonzero terms of d_C for each."""
    if sur is None:
        sur = surgery(c)
    k = c.n_arcs
    t = len(c.circles)
    s = len(sur.dual.circles)
    g = (2 + k - t - s) // 2
    where = _endpoints_by_circle(c)
    all_x = (1 << t) - 1
    all_y = (1 << s) - 1
    out: list[ConfigType] = []

    if g == 0 and t == 2 and all(where[2 * i] != where[2 * i + 1] for i in range(k)):
        tails = {where[2 * i] for i in range(k)}
        if not RULES["A_same_direction"] or len(tails) == 1:
            out.append(ConfigType("A", k, terms=[(0, 0)]))

    if g == 0 and s == 2 and t == k and all(len(seq) == 2 for seq in c.circles):
        if not RULES["B_coherent"] or all(seq[0] % 2 != seq[1] % 2 for seq in c.circles):
            out.append(ConfigType("B", k, terms=[(all_x, all_y)]))

    if g == 1 and t == 1:
        pq = is_type_c(c)
        if pq is not None:
            out.append(ConfigType("C", pq[0], pq[1], terms=[(0, 0)]))

    if g == 1 and s == 1 and t == k - 1:
        chir = RULES["C_sigma"] if RULES["D_from_C"] else 1 - RULES["C_sigma"]
        pq = is_type_c(sur.dual, chir)
        if pq is not None:
            out.append(ConfigType("D", pq[0], pq[1], terms=[(all_x, all_y)]))

    if g == 0:
        out.extend(_type_e(c, sur, where))
    return out


def _arc_direction(c: Configuration, center: list[int], where: dict, e: int) -> int:
    """Direction of the arc at endpoint ``e`` of the central circle.

    A leaf arc counts 1 when it points into the center.  A chord counts 1
    when, walking along the center with the chord on the left, its cap is
    entered at the tail.  ``E_in_matches_tail_first`` fixes how the two
    kinds are compared.
    """
    if where[e ^ 1] != where[e]:
        return int(e % 2 == 1)
    n = len(center)
    i = center.index(e)
    forward = c.side[e] == LEFT
    step = 1 if forward else -1
    first = e if center[(i + step) % n] == e ^ 1 else e ^ 1
    tail_first = first % 2 == 0
    if RULES["E_in_matches_tail_first"]:
        return int(tail_first)
    return int(not tail_first)


def _type_e(c: Configuration, sur: Surgery, where: dict) -> list[ConfigType]:
    out = []
    for center, seq in enumerate(c.circles):
        leaves = 0
        ok = True
        for k2, other in enumerate(c.circles):
            if k2 == center:
                continue
            if len(other) != 1 or where[other[0] ^ 1] != center:
                ok = False
                break
            leaves |= 1 << k2
        if not ok:
            continue
        n = len(seq)
        body = set()
        for i, e in enumerate(seq):
            nxt = seq[(i + 1) % n]
            if where[e ^ 1] == center and nxt != e ^ 1 and seq[i - 1] != e ^ 1:
                ok = False
                break
            # the segment after e is a cap when it runs between the ends of one chord
            if nxt != e ^ 1:
                body.add(sur.segment_circle[e])
        if not ok:
            continue
        chords = sum(1 for e in seq if where[e ^ 1] == center) // 2
        p = bin(leaves).count("1")
        if not body:
            # a lone chord: both pieces are caps
            terms = [(leaves, 1 << sur.segment_circle[e]) for e in seq]
        else:
            if len(body) != 1:
                continue
            if c.n_arcs > 1:
                dirs = {_arc_direction(c, seq, where, e) for e in seq}
                if len(dirs) != 1:
                    continue
            terms = [(leaves, 1 << body.pop())]
        out.append(ConfigType("E", p, chords, terms=terms))
    return out


def d_map(c: Configuration, mirrored: bool = False, sur: Surgery | None = None) -> tuple[dict, Surgery]:
    """Nonzero entries of d_C (or d'_C = d_{m(C)} when ``mirrored``).

    Returns ``({a: set of b}, surgery)``, where the surgery's ending circle
    indices are the ones used by the masks ``b``.
    """
    conf = mirror(c) if mirrored else c
    if sur is None:
        sur = surgery(conf)
    table: dict = {}
    for ct in classify(conf, sur):
        for a, b in ct.terms:
            table.setdefault(a, set()).symmetric_difference_update({b})
    return {a: bs for a, bs in table.items() if bs}, sur


def point_map(c: Configuration, sur: Surgery, x_p: int | None, y_p: int) -> dict:
    """Nonzero entries of P_C for a purely active connected configuration.

    ``x_p`` is the index of the starting circle meeting the base point (None
    when that circle is passive) and ``y_p`` the index of the ending circle
    meeting it.  P_C is nonzero exactly when ``x_p`` is a center to which
    every other circle is attached by a single arc with its tail on the
    center, every remaining arc is a chord of the center whose dual arc has
    its tail on ``y_p``, and ``y_p`` meets every dual arc.  Then the product
    of the leaf circles maps to ``y_p``.
    """
    if x_p is None:
        return {}
    where = _endpoints_by_circle(c)
    dual_where = {e: j for j, seq in enumerate(sur.dual.circles) for e in seq}
    if c.n_arcs > 1 and genus(c, len(sur.dual.circles)) != 0:
        return {}
    leaves = 0
    for k, seq in enumerate(c.circles):
        if k == x_p:
            continue
        if len(seq) != 1 or where[seq[0] ^ 1] != x_p:
            return {}
        leaves |= 1 << k
    for i in range(c.n_arcs):
        if y_p not in (dual_where[2 * i], dual_where[2 * i + 1]):
            return {}
        if where[2 * i] != where[2 * i + 1]:
            if where[2 * i] != x_p:
                return {}
        elif dual_where[2 * i] != y_p:
            return {}
    return {leaves: {1 << y_p}}


def homotopy_map(c: Configuration) -> dict:
    """Nonzero entries of the edge homotopy H_C (1-dimensional only).

    Split: 1 -> 1.  Join: x1 x2 -> y.  Arc orientation plays no role.
    """
    if c.n_arcs != 1:
        return {}
    if len(c.circles) == 1:
        return {0: {0}}
    return {3: {1}}


def apply(table: dict, a: int) -> set:
    """Image of the monomial ``a`` under a map given as ``{a: set of b}``."""
    return set(table.get(a, ()))


# -- extension to passive circles and rule checks ---------------------------


def full_map(c: Configuration, rule: Callable[[Configuration, Surgery], dict]) -> Callable[[int], set]:
    """Extend a rule on the active part of ``c`` to all monomials of ``c``.

    ``rule(active, surgery)`` returns the active table.  The result maps a
    starting monomial of ``c`` to a set of ending monomials indexed by
    ``surgery(c).dual.circles``.  A disconnected active part gives zero.
    """
    full = surgery(c)
    act = active_part(c)
    keep = [k for k, seq in enumerate(c.circles) if seq]
    passive = [k for k, seq in enumerate(c.circles) if not seq]
    if act.graph_components() != 1:
        return lambda a: set()
    sur = surgery(act)
    table = rule(act, sur)
    # ending circles of the active surgery keep their order inside the full one
    n_active_end = len(sur.dual.circles)

    def f(a: int) -> set:
        loc = 0
        for i, k in enumerate(keep):
            if a >> k & 1:
                loc |= 1 << i
        tail = 0
        for k in passive:
            if a >> k & 1:
                tail |= 1 << full.passive_map[k]
        out = set()
        for b in table.get(loc, ()):
            out ^= {b | tail}
        return out

    assert len(full.dual.circles) == n_active_end + len(passive)
    return f


def _gr(mask: int, t: int) -> int:
    return t - 2 * bin(mask).count("1")


def check_grading(f: Callable[[int], set], c: Configuration) -> bool:
    """gr(b) - gr(a) = k - 2 for every nonzero term."""
    t = len(c.circles)
    s = len(surgery(c).dual.circles)
    return all(_gr(b, s) - _gr(a, t) == c.n_arcs - 2 for a in range(1 << t) for b in f(a))


def check_extension(f: Callable[[int], set], c: Configuration) -> bool:
    """F(a * v) = F(a) * v' for every passive circle v with image v'."""
    sur = surgery(c)
    t = len(c.circles)
    for v, w in sur.passive_map.items():
        for a in range(1 << t):
            if a >> v & 1:
                continue
            if f(a | 1 << v) != {b | 1 << w for b in f(a)}:
                return False
    return True


def check_disconnected(f: Callable[[int], set], c: Configuration) -> bool:
    """A disconnected configuration has F = 0."""
    act = active_part(c)
    if not act.circles or act.graph_components() == 1:
        return True
    return all(not f(a) for a in range(1 << len(c.circles)))


def check_filtration(f: Callable[[int], set], c: Configuration) -> bool:
    """For every base point position, x(P) | a implies y(P) | b."""
    sur = surgery(c)
    t = len(c.circles)
    points = [(k, sur.segment_circle[e]) for k, seq in enumerate(c.circles) for e in seq]
    points += list(sur.passive_map.items())
    for x, y in points:
        for a in range(1 << t):
            if a >> x & 1 and any(not b >> y & 1 for b in f(a)):
                return False
    return True
