"""Pages of the spectral sequence of the h-filtered complex.

Two independent routes compute the pages:

* ``cancel``: iterated Gaussian cancellation, degree by degree, with a
  choice of pivot strategy (``"minfill"`` or ``"first"``);
* ``persistence``: compiled column reduction in δ blocks.  A pair of
  generators with h-gap ℓ survives on E^1, ..., E^ℓ and is gone from E^{ℓ+1}.

Both produce a ``PageSequence``; ``compute_pages`` picks the compiled route
for large complexes unless told otherwise.
"""

from __future__ import annotations

import heapq
import json
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .complex import ChainComplex

CANCEL_LIMIT = 40000


# -- polynomials ------------------------------------------------------------------


_TERM = re.compile(r"(\d*)(?:t(?:\^\{?(-?\d+)\}?)?)?(?:q(?:\^\{?(-?\d+)\}?)?)?$")


class PoincarePolynomial:
    """Sparse Laurent polynomial Σ c·t^i q^j with nonnegative coefficients."""

    def __init__(self, terms: dict | None = None):
        self.terms = {k: int(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def from_ranks(cls, ranks: dict) -> PoincarePolynomial:
        return cls(ranks)

    @classmethod
    def parse(cls, text: str) -> PoincarePolynomial:
        """Read both ``t^{2}q^{9}`` and ``t^2q^9`` forms; ``"0"`` is zero."""
        text = text.replace(" ", "")
        if text == "0":
            return cls()
        terms: Counter = Counter()
        for part in text.split("+"):
            m = _TERM.match(part)
            if not part or m is None or m.group(0) != part:
                raise ValueError(f"cannot parse term {part!r}")
            coef = int(m.group(1)) if m.group(1) else 1
            has_t = "t" in part
            has_q = "q" in part
            i = int(m.group(2)) if m.group(2) is not None else (1 if has_t else 0)
            j = int(m.group(3)) if m.group(3) is not None else (1 if has_q else 0)
            terms[(i, j)] += coef
        return cls(dict(terms))

    def total(self) -> int:
        return sum(self.terms.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, PoincarePolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: PoincarePolynomial) -> PoincarePolynomial:
        out = Counter(self.terms)
        out.update(other.terms)
        return PoincarePolynomial(dict(out))

    def __mul__(self, other: PoincarePolynomial) -> PoincarePolynomial:
        out: Counter = Counter()
        for (a, b), c in self.terms.items():
            for (x, y), e in other.terms.items():
                out[(a + x, b + y)] += c * e
        return PoincarePolynomial(dict(out))

    def shift(self, dt: int = 0, dq: int = 0) -> PoincarePolynomial:
        return PoincarePolynomial({(i + dt, j + dq): c for (i, j), c in self.terms.items()})

    def mirror(self) -> PoincarePolynomial:
        """Reindex (t, q) -> (t^-1, q^-1)."""
        return PoincarePolynomial({(-i, -j): c for (i, j), c in self.terms.items()})

    def format(self, braces: bool = True) -> str:
        """Terms ordered by t then q exponent; ``braces`` gives the LaTeX form ``t^{2}q^{9}``."""
        if not self.terms:
            return "0"

        def power(var, e):
            if e == 0:
                return ""
            if e == 1:
                return var
            return f"{var}^{{{e}}}" if braces else f"{var}^{e}"

        parts = []
        for (i, j) in sorted(self.terms):
            c = self.terms[(i, j)]
            mono = power("t", i) + power("q", j)
            if not mono:
                parts.append(str(c))
            else:
                parts.append((str(c) if c > 1 else "") + mono)
        return "+".join(parts)

    def __str__(self) -> str:
        return self.format(braces=False)

    def __repr__(self) -> str:
        return f"PoincarePolynomial({self.format(False)!r})"

    def to_json(self) -> list:
        return [[i, j, c] for (i, j), c in sorted(self.terms.items())]


# -- pages -----------------------------------------------------------------------


@dataclass
class Page:
    """Bigraded ranks of E^k."""

    k: int
    ranks: dict

    @property
    def rank(self) -> int:
        return sum(self.ranks.values())

    def poly(self) -> PoincarePolynomial:
        return PoincarePolynomial(self.ranks)

    def same_ranks(self, other: Page) -> bool:
        return self.poly() == other.poly()


@dataclass
class PageSequence:
    """Pages E^0, E^1, ... up to the first page after which nothing cancels."""

    pages: list
    log: list = field(default_factory=list)

    def page(self, k: int) -> Page:
        """E^k; pages past the last computed one equal the last (E^∞)."""
        if k < len(self.pages):
            return self.pages[k]
        last = self.pages[-1]
        return Page(k, dict(last.ranks))

    @property
    def collapse(self) -> int:
        """Index of the first page equal to E^∞."""
        return len(self.pages) - 1

    @property
    def infinity(self) -> Page:
        return self.pages[-1]

    def ranks(self) -> list[int]:
        return [p.rank for p in self.pages]

    def to_json(self) -> dict:
        return {"pages": [{"k": p.k, "rank": p.rank, "poly": p.poly().to_json()} for p in self.pages],
                "collapse": self.collapse}


def _bigradings(c: ChainComplex) -> list:
    return list(zip(c.h.tolist(), c.q.tolist()))


def _page_from(grads: list, alive) -> dict:
    out: Counter = Counter()
    for g in alive:
        out[grads[g]] += 1
    return dict(out)


# -- cancellation ------------------------------------------------------------------


class CancellationState:
    """A mutable copy of a complex's differential for Gaussian cancellation."""

    def __init__(self, c: ChainComplex):
        self.h = c.h.tolist()
        self.out: list[set] = c.adjacency()
        self.inn: list[set] = [set() for _ in range(len(c))]
        for s, targets in enumerate(self.out):
            for t in targets:
                self.inn[t].add(s)
        self.alive = set(range(len(c)))

    def cancel(self, k: int, l: int) -> list:
        """Cancel the unit entry k -> l; returns the newly created entries."""
        if l not in self.out[k]:
            raise ValueError(f"no differential entry {k} -> {l}")
        preds = [u for u in self.inn[l] if u != k]
        succs = [v for v in self.out[k] if v != l]
        created = []
        for u in preds:
            row = self.out[u]
            for v in succs:
                if v in row:
                    row.discard(v)
                    self.inn[v].discard(u)
                else:
                    row.add(v)
                    self.inn[v].add(u)
                    created.append((u, v))
        for z in (k, l):
            for v in self.out[z]:
                self.inn[v].discard(z)
            for u in self.inn[z]:
                self.out[u].discard(z)
            self.out[z] = set()
            self.inn[z] = set()
            self.alive.discard(z)
        return created

    def has_differential(self) -> bool:
        return any(self.out[g] for g in self.alive)


def cancel(state: CancellationState, k: int, l: int) -> None:
    """Cancel the entry d(x_k, x_l) = 1 in place."""
    state.cancel(k, l)


def _cancel_pages(c: ChainComplex, strategy: str) -> PageSequence:
    if strategy not in ("minfill", "first"):
        raise ValueError(f"unknown pivot strategy {strategy!r}")
    st = CancellationState(c)
    grads = _bigradings(c)
    h = st.h
    pages = [Page(0, _page_from(grads, st.alive)), Page(1, _page_from(grads, st.alive))]
    log: list = []
    i = 1
    while st.has_differential():
        if strategy == "first":
            _cancel_degree_first(st, h, i, log)
        else:
            _cancel_degree_minfill(st, h, i, log)
        i += 1
        pages.append(Page(i, _page_from(grads, st.alive)))
    return PageSequence(pages, log)


def _cancel_degree_first(st, h, i, log):
    progress = True
    while progress:
        progress = False
        for g in sorted(st.alive):
            if g not in st.alive:
                continue
            hits = [v for v in st.out[g] if h[v] - h[g] == i]
            if hits:
                l = min(hits)
                st.cancel(g, l)
                log.append((g, l, i))
                progress = True


def _cancel_degree_minfill(st, h, i, log):
    def cost(u, v):
        return (len(st.inn[v]) - 1) * (len(st.out[u]) - 1)

    heap = []
    for u in st.alive:
        for v in st.out[u]:
            if h[v] - h[u] == i:
                heap.append((cost(u, v), u, v))
    heapq.heapify(heap)
    while heap:
        c0, u, v = heapq.heappop(heap)
        if u not in st.alive or v not in st.out[u]:
            continue
        c1 = cost(u, v)
        if c1 != c0:
            heapq.heappush(heap, (c1, u, v))
            continue
        for a, b in st.cancel(u, v):
            if h[b] - h[a] == i:
                heapq.heappush(heap, (cost(a, b), a, b))
        log.append((u, v, i))


# -- column reduction --------------------------------------------------------------------


def persistence_pairs(c: ChainComplex) -> np.ndarray:
    """``partner[g]`` for every generator (-1 when it survives to E^∞)."""
    from ._persist import reduce_columns

    n = len(c)
    if n == 0:
        return np.zeros(0, np.int64)
    ptr, idx = c.csr()
    gen_at = np.lexsort((np.arange(n), -c.h)).astype(np.int64)
    pos_of = np.empty(n, np.int64)
    pos_of[gen_at] = np.arange(n, dtype=np.int64)
    order = np.lexsort((pos_of, -c.delta)).astype(np.int64)
    return reduce_columns(ptr, idx.astype(np.int64), pos_of, gen_at, order)


def _persistence_pages(c: ChainComplex) -> PageSequence:
    partner = persistence_pairs(c)
    n = len(c)
    life = np.full(n, -1, np.int64)
    paired = partner >= 0
    life[paired] = np.abs(c.h[partner[paired]] - c.h[paired])
    top = int(life.max()) if n and paired.any() else 0
    pages = []
    key_h = c.h
    key_q = c.q
    for k in range(0, top + 2):
        alive = (life < 0) | (life >= max(k, 1))
        pages.append(Page(k, _count(key_h[alive], key_q[alive])))
    src = np.flatnonzero(paired & (c.h[np.maximum(partner, 0)] > c.h))
    log = [(int(s), int(partner[s]), int(life[s])) for s in src]
    return PageSequence(pages, log)


def _count(h: np.ndarray, q: np.ndarray) -> dict:
    if h.size == 0:
        return {}
    pairs, counts = np.unique(np.stack([h, q], axis=1), axis=0, return_counts=True)
    return {(int(a), int(b)): int(n) for (a, b), n in zip(pairs, counts)}


def compute_pages(c: ChainComplex, method: str = "auto", strategy: str = "minfill") -> PageSequence:
    """Pages E^0, E^1, ... of ``c`` until the differential is used up.

    The last page is E^∞.  ``method`` is ``"cancel"``, ``"persistence"`` or
    ``"auto"`` (cancellation for small complexes).
    """
    if method == "auto":
        method = "cancel" if len(c) <= CANCEL_LIMIT else "persistence"
    if method == "cancel":
        return _cancel_pages(c, strategy)
    if method == "persistence":
        return _persistence_pages(c)
    raise ValueError(f"unknown method {method!r}")


def poincare_polynomial(p: Page) -> PoincarePolynomial:
    return p.poly()


# -- Khovanov homology, computed independently ---------------------------------------------


def khovanov_oracle(d, part: str = "full", basepoint=None) -> Page:
    """Bigraded F2 Khovanov homology from merge/split maps on the cube.

    Built only from circle tracing, so it shares no code with the family
    maps; ranks come from bitset Gaussian elimination per bigrading.
    ``d`` may be a diagram or a ``ChainComplex`` (its diagram and part are used).
    """
    from .cube import resolve

    if isinstance(d, ChainComplex):
        part, basepoint, d = d.part, d.basepoint, d.diagram
    if part not in ("full", "reduced", "quotient"):
        raise ValueError(part)
    if part != "full" and basepoint is None:
        basepoint = d.base_point()
    n = d.n
    loops = d.free_loops
    res = [resolve(d, I) for I in range(1 << n)]

    def keep(I, m):
        if part == "full":
            return True
        x = res[I].edge_circle[basepoint.edge] if n else 0
        return bool(m >> x & 1) == (part == "reduced")

    index: dict = {}
    grade: dict = {}
    qshift = -2 if part == "quotient" else 0
    for I in range(1 << n):
        w = bin(I).count("1")
        nb = len(res[I])
        for m in range(1 << nb):
            if keep(I, m):
                index[(I, m)] = len(index)
                g = nb - 2 * bin(m).count("1")
                grade[(I, m)] = (w - d.n_minus, g + w + d.n_plus - 2 * d.n_minus + qshift)
    rows: dict = {}
    for (I, m), gi in index.items():
        image = 0
        for c in range(n):
            if I >> c & 1:
                continue
            J = I | 1 << c
            for m2 in _khovanov_edge(res[I], res[J], d, c, m, loops):
                j = index.get((J, m2))
                if j is not None:
                    image ^= 1 << j
        rows[gi] = image
    by_grade: dict = {}
    for key, gi in index.items():
        by_grade.setdefault(grade[key], []).append(gi)
    # rank of d restricted to each bigrading (source side)
    rank_from: dict = {}
    for gr, gens in by_grade.items():
        rank_from[gr] = _f2_rank([rows[g] for g in gens])
    ranks = {}
    for (h, q), gens in by_grade.items():
        r = len(gens) - rank_from[(h, q)] - rank_from.get((h - 1, q), 0)
        if r:
            ranks[(h, q)] = r
    return Page(2, ranks)


def _khovanov_edge(rI, rJ, d, c, m, loops):
    """Monomials of the merge/split map across crossing ``c`` applied to ``m``."""
    ends = d.crossings[c].edges
    a = rI.edge_circle[ends[0]]
    b = rI.edge_circle[ends[2]]
    nI = len(rI) - loops
    nJ = len(rJ) - loops
    ymap = {}
    for k in range(nI):
        ymap[k] = rJ.edge_circle[rI.edges[k][0]]
    out_base = 0
    for k in range(nI):
        if k not in (a, b) and m >> k & 1:
            out_base |= 1 << ymap[k]
    for i in range(loops):
        if m >> (nI + i) & 1:
            out_base |= 1 << (nJ + i)
    if a != b:
        y = rJ.edge_circle[ends[0]]
        xa, xb = m >> a & 1, m >> b & 1
        if xa and xb:
            return []
        return [out_base | (1 << y if xa or xb else 0)]
    y1 = rJ.edge_circle[ends[0]]
    y2 = rJ.edge_circle[ends[1]]
    if m >> a & 1:
        return [out_base | 1 << y1 | 1 << y2]
    return [out_base | 1 << y1, out_base | 1 << y2]


def _f2_rank(rows: list[int]) -> int:
    pivots: dict = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            p = pivots.get(top)
            if p is None:
                pivots[top] = r
                rank += 1
                break
            r ^= p
    return rank


# -- comparisons and formulas ------------------------------------------------------------


def twin_prediction(reduced: Page) -> Page:
    """Two copies of a reduced page, at q and q + 2 (the unreduced prediction)."""
    p = reduced.poly()
    return Page(reduced.k, (p + p.shift(dq=2)).terms)


def tensor_pages(p1: Page, p2: Page, qshift: int = 0) -> Page:
    return Page(p1.k, (p1.poly() * p2.poly()).shift(dq=qshift).terms)


_P_TABLE = {
    0: {2: "1+tq^2", 3: "1+tq^2", 4: "1+tq^2"},
    1: {2: "1+tq^2+t^2q^2+2t^2q^4", 3: "tq^2+2t^2q^4", 4: "tq^2+2t^2q^4"},
    2: {2: "1+tq^2+t^2q^2+t^3q^6", 3: "tq^2+t^3q^6", 4: "tq^2+t^3q^6"},
    3: {2: "1+tq^2+t^2q^2+t^3q^6+t^4q^6+t^5q^8", 3: "tq^2+t^4q^6", 4: "0"},
    4: {2: "1+tq^2+t^2q^2+t^3q^6+t^4q^6+t^5q^8+t^6q^8+2t^6q^10",
        3: "tq^2+t^4q^6+t^6q^8+2t^6q^10", 4: "t^6q^8+2t^6q^10"},
    5: {2: "1+tq^2+t^2q^2+t^3q^6+t^4q^6+t^5q^8+t^6q^8+t^7q^12",
        3: "tq^2+t^4q^6+t^6q^8+t^7q^12", 4: "t^6q^8+t^7q^12"},
}


def conjectured_torus_poly(n: int, k: int) -> PoincarePolynomial:
    """Conjectured reduced page E^k of T(3, n) for k = 2, 3, 4.

    With n = 2 + 6j + l, the page is
    q^{2n-3} (1 + t^2 q^4 (f_j p^k + t^{8j} q^{12j} p^k_l)) where
    f_j = Σ_{i<j} t^{8i} q^{12i} and p^k = p^k_5.  The shift of the last
    term follows the period of f_j, which is what the T(3,8) table needs.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if k not in (2, 3, 4):
        raise ValueError("k must be 2, 3 or 4")
    j, l = divmod(n - 2, 6)
    P = PoincarePolynomial.parse
    f = PoincarePolynomial({(8 * i, 12 * i): 1 for i in range(j)})
    inner = f * P(_P_TABLE[5][k]) + P(_P_TABLE[l][k]).shift(8 * j, 12 * j)
    return (P("1") + inner.shift(2, 4)).shift(0, 2 * n - 3)


def ranks_json(seq: PageSequence) -> str:
    return json.dumps(seq.to_json(), sort_keys=True)
