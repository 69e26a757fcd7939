"""The filtered chain complex (C_D, d(t)) and maps on it.

Generators are packed per resolution: generator ``offs[I] + m`` is the
monomial ``m`` (bit ``k`` set = circle ``k`` of ``I`` carries ``x``).  The
reduced and quotient variants keep only the monomials with (resp. without)
``x`` on the marked circle and pack them by deleting that bit.

Maps are stored as deduplicated coordinate lists ``(src, tgt)`` over F2.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import szabo_maps as SM
from .cube import Face, active_part, face_configuration, resolve, surgery
from .diagram import BasePoint, LinkDiagram, default_decoration

DEFAULT_MAX_GENERATORS = 1 << 28

# q-grading offsets of the variants.  The reduced complex keeps the grading
# of its generators in C; the quotient is lowered by 2 so that multiplying
# by x(P) identifies it with the reduced complex bigrading by bigrading.
QSHIFT = {"full": 0, "reduced": 0, "quotient": -2}


class ResourceLimitError(RuntimeError):
    """Raised when a build would exceed the configured generator cap."""


@dataclass
class ChainComplex:
    """Generators with (h, q) gradings and an F2 differential.

    ``resolution[g]`` and ``monomial[g]`` describe generator ``g``; for the
    reduced and quotient variants ``monomial`` is the full monomial,
    including the marked bit.
    """

    h: np.ndarray
    q: np.ndarray
    src: np.ndarray
    tgt: np.ndarray
    resolution: np.ndarray
    monomial: np.ndarray
    part: str = "full"
    variant: str = "standard"
    diagram: LinkDiagram | None = None
    decoration: tuple | None = None
    basepoint: BasePoint | None = None
    offsets: np.ndarray | None = None
    _csr: tuple | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.h.shape[0])

    @property
    def delta(self) -> np.ndarray:
        return self.q - 2 * self.h

    @property
    def n_entries(self) -> int:
        return int(self.src.shape[0])

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) of the differential, rows = sources."""
        if self._csr is None:
            self._csr = _to_csr(self.src, self.tgt, len(self))
        return self._csr

    def targets(self, g: int) -> np.ndarray:
        ptr, idx = self.csr()
        return idx[ptr[g]:ptr[g + 1]]

    def adjacency(self) -> list[set]:
        """Differential as a list of target sets (for small complexes)."""
        out: list[set] = [set() for _ in range(len(self))]
        for s, t in zip(self.src.tolist(), self.tgt.tolist()):
            out[s].add(t)
        return out

    def label(self, g: int) -> str:
        """Generator name ``I:m`` with both as bit strings, crossing 0 and circle 0 first."""
        n = self.diagram.n if self.diagram is not None else 0
        I = int(self.resolution[g])
        m = int(self.monomial[g])
        res = "".join("1" if I >> i & 1 else "0" for i in range(n))
        return f"{res}:{m:b}"

    def to_json(self) -> str:
        """Debug dump: generators with gradings and target index lists."""
        ptr, idx = self.csr()
        gens = []
        for g in range(len(self)):
            gens.append({
                "index": g,
                "resolution": int(self.resolution[g]),
                "monomial": int(self.monomial[g]),
                "h": int(self.h[g]),
                "q": int(self.q[g]),
                "targets": idx[ptr[g]:ptr[g + 1]].tolist(),
            })
        return json.dumps({"part": self.part, "variant": self.variant, "generators": gens})


def _to_csr(src: np.ndarray, tgt: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((tgt, src))
    s = src[order]
    idx = tgt[order].astype(np.int64)
    counts = np.bincount(s, minlength=n) if n else np.zeros(0, np.int64)
    ptr = np.zeros(n + 1, np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, idx


def xor_reduce(src: np.ndarray, tgt: np.ndarray, n_tgt: int) -> tuple[np.ndarray, np.ndarray]:
    """Merge repeated entries over F2: keep pairs occurring an odd number of times."""
    if src.size == 0:
        return src.astype(np.int64), tgt.astype(np.int64)
    key = src.astype(np.int64) * max(n_tgt, 1) + tgt.astype(np.int64)
    key.sort()
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    lengths = np.diff(np.r_[starts, key.size])
    keep = key[starts[lengths % 2 == 1]]
    return keep // max(n_tgt, 1), keep % max(n_tgt, 1)


# -- diagram arrays -----------------------------------------------------------


@dataclass
class _Arrays:
    n: int
    tup: np.ndarray
    oc: np.ndarray
    op: np.ndarray
    ic: np.ndarray
    ip: np.ndarray
    labels: list
    index: dict
    loops: int


def _arrays(d: LinkDiagram) -> _Arrays:
    labels = d.edges
    index = {e: i for i, e in enumerate(labels)}
    E = len(labels)
    tup = np.array([[index[e] for e in c.edges] for c in d.crossings], dtype=np.int64).reshape(d.n, 4)
    oc = np.zeros(E, np.int64)
    op = np.zeros(E, np.int64)
    ic = np.zeros(E, np.int64)
    ip = np.zeros(E, np.int64)
    for e, (out_port, in_port) in d.edge_ends.items():
        i = index[e]
        oc[i], op[i] = out_port
        ic[i], ip[i] = in_port
    return _Arrays(d.n, tup, oc, op, ic, ip, labels, index, d.free_loops)


def circle_table(d: LinkDiagram) -> tuple[np.ndarray, np.ndarray]:
    """(circle of each edge per resolution, circle count per resolution).

    Free loops are not included in the counts.
    """
    from . import _fast

    a = _arrays(d)
    if d.n == 0:
        return np.zeros((1, 0), np.int8), np.zeros(1, np.int64)
    return _fast.all_circles(d.n, a.tup, a.oc, a.op, a.ic, a.ip, len(a.labels))


def _part_mode(part: str) -> int:
    try:
        return {"full": 0, "reduced": 1, "quotient": 2}[part]
    except KeyError:
        raise ValueError(f"unknown complex part {part!r}") from None


def estimate_generators(d: LinkDiagram, part: str = "full") -> int:
    """Exact generator count Σ_I 2^{circles(I)} (halved for reduced/quotient)."""
    if d.n == 0:
        total = 1 << d.free_loops
    else:
        _, nc = circle_table(d)
        total = int(np.sum(np.left_shift(1, nc + d.free_loops, dtype=np.int64)))
    return total // 2 if part != "full" else total


def _offsets_and_gradings(d: LinkDiagram, nc_all: np.ndarray, circ_all: np.ndarray, part: str, base: int):
    mode = _part_mode(part)
    loops = d.free_loops
    N = 1 << d.n
    nb = nc_all + loops
    sizes = np.left_shift(1, nb - (1 if mode else 0), dtype=np.int64)
    offs = np.zeros(N + 1, np.int64)
    np.cumsum(sizes, out=offs[1:])
    total = int(offs[-1])
    res = np.repeat(np.arange(N, dtype=np.int64), sizes)
    local = np.arange(total, dtype=np.int64) - offs[:-1][res]
    if mode:
        marked = circ_all[:, base].astype(np.int64)[res]
        low = local & ((np.int64(1) << marked) - 1)
        high = (local >> marked) << (marked + 1)
        bit = (np.int64(1) << marked) if mode == 1 else 0
        mono = high | low | bit
    else:
        mono = local
    weight = np.array([bin(I).count("1") for I in range(N)], dtype=np.int64)[res]
    pop = _popcount_array(mono)
    h = weight - d.n_minus
    q = (nb[res] - 2 * pop) + weight + d.n_plus - 2 * d.n_minus + QSHIFT[part]
    return offs, res, mono, h.astype(np.int64), q.astype(np.int64)


def _popcount_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64).copy()
    out = np.zeros(x.shape, np.int64)
    while np.any(x):
        out += (x & np.uint64(1)).astype(np.int64)
        x >>= np.uint64(1)
    return out


def build_complex(
    d: LinkDiagram,
    t=None,
    variant: str = "standard",
    part: str = "full",
    basepoint: BasePoint | None = None,
    method: str = "fast",
    max_generators: int = DEFAULT_MAX_GENERATORS,
) -> ChainComplex:
    """Assemble (C_D, d(t)), its reduced subcomplex or its quotient.

    ``variant`` is ``"standard"`` or ``"mirror"`` (the differential d').
    ``method="reference"`` classifies every face with ``szabo_maps``; it is
    slow and serves as an independent check of the default path.
    """
    if variant not in ("standard", "mirror"):
        raise ValueError(f"unknown variant {variant!r}")
    mode = _part_mode(part)
    t = tuple(default_decoration(d) if t is None else t)
    if len(t) != d.n:
        raise ValueError("decoration length must equal the crossing count")
    if mode and basepoint is None:
        basepoint = d.base_point()
    lower = (1 << d.n) if mode else (2 << d.n)
    if d.n > 40 or lower > max_generators:
        raise ResourceLimitError(f"estimated generator count at least {lower} exceeds the cap of {max_generators}")
    if d.n == 0:
        return _trivial(d, part, basepoint, variant)
    circ_all, nc_all = circle_table(d)
    total = int(np.sum(np.left_shift(1, nc_all + d.free_loops, dtype=np.int64)))
    if mode:
        total //= 2
    if total > max_generators:
        raise ResourceLimitError(f"estimated generator count {total} exceeds the cap of {max_generators}")
    a = _arrays(d)
    base = a.index[basepoint.edge] if basepoint is not None else 0
    offs, res, mono, h, q = _offsets_and_gradings(d, nc_all, circ_all, part, base)
    if method == "fast":
        src, tgt = _fast_entries(d, a, t, variant, circ_all, nc_all, offs, mode, base)
    elif method == "reference":
        src, tgt = _reference_entries(d, t, variant, offs, mode, basepoint)
    else:
        raise ValueError(f"unknown method {method!r}")
    src, tgt = xor_reduce(src, tgt, total)
    return ChainComplex(h, q, src, tgt, res, mono, part, variant, d, t, basepoint, offs)


def _trivial(d: LinkDiagram, part: str, basepoint, variant) -> ChainComplex:
    loops = d.free_loops
    mono = np.arange(1 << loops, dtype=np.int64)
    if part == "reduced":
        mono = mono[mono & 1 == 1]
    elif part == "quotient":
        mono = mono[mono & 1 == 0]
    h = np.zeros(mono.size, np.int64)
    q = loops - 2 * _popcount_array(mono) + QSHIFT[part]
    empty = np.zeros(0, np.int64)
    return ChainComplex(h, q, empty, empty, np.zeros(mono.size, np.int64), mono, part, variant, d,
                        (), basepoint, np.array([0, mono.size], np.int64))


def _fast_entries(d, a, t, variant, circ_all, nc_all, offs, mode, base):
    from . import _fast

    tt = np.array(t, dtype=np.int64)
    sign = -1 if variant == "mirror" else 1
    c_sigma = int(SM.RULES["C_sigma"])
    e_tail = 1 if SM.RULES["E_in_matches_tail_first"] else 0
    cap = 1 << 16
    while True:
        counts = _fast.count_entries(d.n, a.tup, a.oc, a.op, a.ic, a.ip, tt, sign, a.loops, circ_all,
                                     nc_all, offs, mode, base, c_sigma, e_tail, cap)
        if np.all(counts >= 0):
            break
        cap <<= 2
    starts = np.zeros(counts.size + 1, np.int64)
    np.cumsum(counts, out=starts[1:])
    out_s = np.empty(int(starts[-1]), np.int64)
    out_t = np.empty(int(starts[-1]), np.int64)
    _fast.fill_entries(d.n, a.tup, a.oc, a.op, a.ic, a.ip, tt, sign, a.loops, circ_all, nc_all, offs,
                       mode, base, c_sigma, e_tail, cap, starts, out_s, out_t)
    return out_s, out_t


# -- reference assembly ---------------------------------------------------------


def _face_terms(d, t, I, J, res_I, res_J, rule):
    """Terms of a face map in ambient circle indices.

    Returns (list of (A, B), passive I circles, their J images) or None.
    ``rule(active, surgery)`` gives the active table.
    """
    conf = face_configuration(d, Face(I, J, d.n), t, res_I)
    act = active_part(conf)
    if act.graph_components() != 1:
        return None
    sur = surgery(act)
    table = rule(act, sur)
    if not table:
        return None
    ycirc = {y: res_J.edge_circle[act.after_edge[e]] for e, y in sur.segment_circle.items()}
    terms = []
    for a_loc, bs in table.items():
        A = sum(1 << act.names[i] for i in range(len(act.circles)) if a_loc >> i & 1)
        for b_loc in bs:
            B = sum(1 << jj for j, jj in ycirc.items() if b_loc >> j & 1)
            terms.append((A, B))
    # circle sets list the free loops last
    nI = len(res_I) - d.free_loops
    nJ = len(res_J) - d.free_loops
    passive = [k for k in range(nI) if not conf.circles[k]]
    images = [res_J.edge_circle[res_I.edges[k][0]] for k in passive]
    for i in range(d.free_loops):
        passive.append(nI + i)
        images.append(nJ + i)
    return terms, passive, images


def _expand(terms, passive, images, offI, offJ, mode, mI, mJ, src, tgt):
    for A, B in terms:
        for pm in range(1 << len(passive)):
            P = Q = 0
            for i, k in enumerate(passive):
                if pm >> i & 1:
                    P |= 1 << k
                    Q |= 1 << images[i]
            s, b = A | P, B | Q
            if mode == 1 and not (s >> mI & 1 and b >> mJ & 1):
                continue
            if mode == 2 and (s >> mI & 1 or b >> mJ & 1):
                continue
            if mode:
                s = _compress(s, mI)
                b = _compress(b, mJ)
            src.append(offI + s)
            tgt.append(offJ + b)


def _compress(m: int, k: int) -> int:
    return ((m >> (k + 1)) << k) | (m & ((1 << k) - 1))


def _reference_entries(d, t, variant, offs, mode, basepoint):
    n = d.n
    mirrored = variant == "mirror"
    res = [resolve(d, I) for I in range(1 << n)]
    src: list[int] = []
    tgt: list[int] = []

    def rule(act, sur):
        table, _ = SM.d_map(act, mirrored)
        return table

    for I in range(1 << n):
        free = ((1 << n) - 1) & ~I
        sub = free
        while sub:
            J = I | sub
            sub = (sub - 1) & free
            got = _face_terms(d, t, I, J, res[I], res[J], rule)
            if got is None:
                continue
            terms, passive, images = got
            mI = res[I].edge_circle[basepoint.edge] if mode else 0
            mJ = res[J].edge_circle[basepoint.edge] if mode else 0
            _expand(terms, passive, images, int(offs[I]), int(offs[J]), mode, mI, mJ, src, tgt)
    return np.array(src, np.int64), np.array(tgt, np.int64)


# -- variants of a built complex -----------------------------------------------


def _marked_mask(c: ChainComplex, P: BasePoint) -> np.ndarray:
    circ_all, _ = circle_table(c.diagram)
    idx = _arrays(c.diagram).index[P.edge]
    marked = circ_all[:, idx].astype(np.int64)[c.resolution]
    return (c.monomial >> marked) & 1 == 1


def _restrict(c: ChainComplex, keep: np.ndarray, part: str, P: BasePoint) -> ChainComplex:
    new_index = np.full(len(c), -1, np.int64)
    new_index[keep] = np.arange(int(keep.sum()), dtype=np.int64)
    ok = keep[c.src] & keep[c.tgt]
    src = new_index[c.src[ok]]
    tgt = new_index[c.tgt[ok]]
    q = c.q[keep] - QSHIFT[c.part] + QSHIFT[part]
    return ChainComplex(c.h[keep], q, src, tgt, c.resolution[keep], c.monomial[keep], part,
                        c.variant, c.diagram, c.decoration, P, None)


def reduced_subcomplex(c: ChainComplex, P: BasePoint | None = None) -> ChainComplex:
    """Subcomplex of monomials divisible by x(P)."""
    if c.part != "full":
        raise ValueError("reduced_subcomplex expects a full complex")
    P = P or c.diagram.base_point()
    keep = _marked_mask(c, P)
    return _restrict(c, keep, "reduced", P)


def quotient_complex(c: ChainComplex, P: BasePoint | None = None) -> ChainComplex:
    """Quotient by the reduced subcomplex: monomials not divisible by x(P)."""
    if c.part != "full":
        raise ValueError("quotient_complex expects a full complex")
    P = P or c.diagram.base_point()
    keep = ~_marked_mask(c, P)
    return _restrict(c, keep, "quotient", P)


def leaves_subcomplex(c: ChainComplex) -> bool:
    """Whether some differential term leaves the set of generators with x on the
    marked circle (closure test for the reduced subcomplex)."""
    keep = _marked_mask(c, c.basepoint or c.diagram.base_point())
    return bool(np.any(keep[c.src] & ~keep[c.tgt]))


# -- maps on the full complex ---------------------------------------------------


@dataclass
class PointMap:
    """An F2-linear map on the generators of a full complex, as entry lists."""

    src: np.ndarray
    tgt: np.ndarray
    size: int

    def adjacency(self) -> list[set]:
        out: list[set] = [set() for _ in range(self.size)]
        for s, t in zip(self.src.tolist(), self.tgt.tolist()):
            out[s].add(t)
        return out


def build_point_map(c: ChainComplex, P: BasePoint | None = None, t=None) -> PointMap:
    """The chain map P(t) = X + sum of the face maps P_C on a full complex."""
    d = c.diagram
    if c.part != "full":
        raise ValueError("the point map acts on the full complex")
    P = P or d.base_point()
    t = tuple(c.decoration if t is None else t)
    n = d.n
    res = [resolve(d, I) for I in range(1 << n)]
    offs = c.offsets
    src: list[int] = []
    tgt: list[int] = []
    for I in range(1 << n):
        # with no crossings the marked circle is the first free loop
        xi = res[I].edge_circle[P.edge] if n else 0
        width = int(offs[I + 1] - offs[I]).bit_length() - 1
        for m in range(1 << width):
            if not m >> xi & 1:
                src.append(int(offs[I]) + m)
                tgt.append(int(offs[I]) + (m | 1 << xi))
        free = ((1 << n) - 1) & ~I
        sub = free
        while sub:
            J = I | sub
            sub = (sub - 1) & free
            yj = res[J].edge_circle[P.edge]

            def rule(act, sur, xi=xi, yj=yj, J=J):
                if xi not in act.names:
                    return {}
                ycirc = {y: res[J].edge_circle[act.after_edge[e]] for e, y in sur.segment_circle.items()}
                inv = {v: k for k, v in ycirc.items()}
                if yj not in inv:
                    return {}
                return SM.point_map(act, sur, act.names.index(xi), inv[yj])

            got = _face_terms(d, t, I, J, res[I], res[J], rule)
            if got is None:
                continue
            terms, passive, images = got
            _expand(terms, passive, images, int(offs[I]), int(offs[J]), 0, 0, 0, src, tgt)
    s, tg = xor_reduce(np.array(src, np.int64), np.array(tgt, np.int64), len(c))
    return PointMap(s, tg, len(c))


def edge_homotopy(c: ChainComplex, m: int) -> PointMap:
    """H_m: the edge homotopy summed over the 1-faces in direction ``m``."""
    d = c.diagram
    if c.part != "full":
        raise ValueError("the edge homotopy acts on the full complex")
    if not 0 <= m < d.n:
        raise ValueError("crossing index out of range")
    t = c.decoration
    src: list[int] = []
    tgt: list[int] = []
    res = {}
    for I in range(1 << d.n):
        if I >> m & 1:
            continue
        J = I | 1 << m
        for K in (I, J):
            if K not in res:
                res[K] = resolve(d, K)
        got = _face_terms(d, t, I, J, res[I], res[J], lambda act, sur: SM.homotopy_map(act))
        if got is None:
            continue
        terms, passive, images = got
        _expand(terms, passive, images, int(c.offsets[I]), int(c.offsets[J]), 0, 0, 0, src, tgt)
    s, tg = xor_reduce(np.array(src, np.int64), np.array(tgt, np.int64), len(c))
    return PointMap(s, tg, len(c))


def compose(f_src, f_tgt, g_src, g_tgt, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Entries of f ∘ g over F2 (apply g first)."""
    import scipy.sparse as sp

    G = sp.csr_matrix((np.ones(g_src.size, np.int64), (g_tgt, g_src)), shape=(size, size))
    F = sp.csr_matrix((np.ones(f_src.size, np.int64), (f_tgt, f_src)), shape=(size, size))
    M = (F @ G).tocoo()
    odd = M.data % 2 == 1
    return M.col[odd].astype(np.int64), M.row[odd].astype(np.int64)


def same_map(a: tuple, b: tuple, size: int) -> bool:
    sa, ta = xor_reduce(*a, size)
    sb, tb = xor_reduce(*b, size)
    return np.array_equal(sa, sb) and np.array_equal(ta, tb)


def add_maps(*maps: tuple, size: int) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate([m[0] for m in maps])
    tgt = np.concatenate([m[1] for m in maps])
    return xor_reduce(src, tgt, size)


def tensor_complex(c1: ChainComplex, c2: ChainComplex, qshift: int = 0) -> ChainComplex:
    """c1 ⊗ c2 with the Leibniz differential over F2 and q shifted by ``qshift``."""
    n1, n2 = len(c1), len(c2)
    i, j = np.meshgrid(np.arange(n1, dtype=np.int64), np.arange(n2, dtype=np.int64), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    h = c1.h[i] + c2.h[j]
    q = c1.q[i] + c2.q[j] + qshift
    s1 = (c1.src[:, None] * n2 + np.arange(n2)[None, :]).ravel()
    t1 = (c1.tgt[:, None] * n2 + np.arange(n2)[None, :]).ravel()
    s2 = (np.arange(n1)[:, None] * n2 + c2.src[None, :]).ravel()
    t2 = (np.arange(n1)[:, None] * n2 + c2.tgt[None, :]).ravel()
    src, tgt = xor_reduce(np.concatenate([s1, s2]), np.concatenate([t1, t2]), n1 * n2)
    zeros = np.zeros(n1 * n2, np.int64)
    return ChainComplex(h, q, src, tgt, zeros, zeros, "tensor", c1.variant)


def differential_squares_to_zero(c: ChainComplex) -> bool:
    s, t = compose(c.src, c.tgt, c.src, c.tgt, len(c))
    return s.size == 0


def configure_threads() -> None:
    """Apply SZABO_THREADS to the numba worker pool when set."""
    value = os.environ.get("SZABO_THREADS")
    if not value:
        return
    import numba

    try:
        n = int(value)
    except ValueError:
        n = 0
    if n < 1:
        raise ValueError(f"SZABO_THREADS must be a positive integer, got {value!r}")
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
