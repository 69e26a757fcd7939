"""Compiled assembly of the differential.

Instead of classifying every face of the cube, each family is enumerated
directly from the planar data of one resolution:

* A_k: subsets of the arcs running from one circle to another;
* B_k: coherent directed cycles in the graph of circles and arcs;
* C_{p,q}: bicliques of interleaving chords of one circle on opposite sides;
* D_{p,q}: the same bicliques among the dual arcs of the target resolution;
* E_{p,q}: a center circle with leaves and adjacent chords of one direction.

Planarity makes the genus conditions automatic for these shapes, so no
surgery is needed; ending circles are read off the target resolution.
``build_complex(..., method="reference")`` classifies face by face instead
and serves as the independent check of this path.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_PARTNER = np.array([[1, 0, 3, 2], [3, 2, 1, 0]], dtype=np.int64)


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _circles(I, tup, oc, op, ic, ip, circ):
    """Fill ``circ[e]`` with the circle of edge ``e``; return the circle count."""
    E = circ.shape[0]
    for e in range(E):
        circ[e] = -1
    nc = 0
    for e0 in range(E):
        if circ[e0] >= 0:
            continue
        e = e0
        ci = ic[e0]
        p = ip[e0]
        while True:
            circ[e] = nc
            q = _PARTNER[(I >> ci) & 1, p]
            e = tup[ci, q]
            if e == e0:
                break
            if oc[e] == ci and op[e] == q:
                ci, p = ic[e], ip[e]
            else:
                ci, p = oc[e], op[e]
        nc += 1
    return nc


@njit(cache=True)
def _local(I, tup, oc, op, ic, ip, t, sign, circ, ep_circ, ep_pos, ep_side, ep_exit, clen):
    """Circles of ``I`` plus, for every crossing, the two endpoints of its
    arc: the 0-arc where ``I`` has bit 0, the dual arc where it has bit 1.

    Index 0 is the tail, 1 the head.  Positions count passages along the
    circle in traversal order.  ``sign`` = -1 mirrors every side.
    """
    E = circ.shape[0]
    for e in range(E):
        circ[e] = -1
    nc = 0
    for e0 in range(E):
        if circ[e0] >= 0:
            continue
        e = e0
        ci = ic[e0]
        p = ip[e0]
        pos = 0
        while True:
            circ[e] = nc
            bit = (I >> ci) & 1
            q = _PARTNER[bit, p]
            s = 0 if (p == 0 or q == 0) else 1
            if bit == 0:
                tail_strand = 0 if t[ci] == 0 else 1
            else:
                tail_strand = 1 if t[ci] == 0 else 0
            j = 0 if s == tail_strand else 1
            ep_circ[ci, j] = nc
            ep_pos[ci, j] = pos
            ep_side[ci, j] = sign if q == (p + 1) % 4 else -sign
            ep_exit[ci, j] = tup[ci, q]
            pos += 1
            e = tup[ci, q]
            if e == e0:
                break
            if oc[e] == ci and op[e] == q:
                ci, p = ic[e], ip[e]
            else:
                ci, p = oc[e], op[e]
        clen[nc] = pos
        nc += 1
    return nc


@njit(cache=True)
def _compress(m, k):
    return ((m >> (k + 1)) << k) | (m & ((1 << k) - 1))


@njit(cache=True)
def _rep_edges(circ_row, nc, rep):
    for k in range(nc):
        rep[k] = -1
    for e in range(circ_row.shape[0]):
        k = circ_row[e]
        if rep[k] < 0:
            rep[k] = e
    return rep


@njit(cache=True)
def _emit(I, J, A, Bs, nB, active, rep_I, nc_all, loops, circ_all, offs, mode, base,
          out_s, out_t, pos, fill, pas_src, pas_tgt):
    """Write the entries of one face term, extended over passive circles."""
    ncI = nc_all[I]
    ncJ = nc_all[J]
    npas = 0
    for k in range(ncI):
        if not (active >> k) & 1:
            pas_src[npas] = k
            pas_tgt[npas] = circ_all[J, rep_I[k]]
            npas += 1
    for l in range(loops):
        pas_src[npas] = ncI + l
        pas_tgt[npas] = ncJ + l
        npas += 1
    mI = 0
    mJ = 0
    if mode != 0:
        mI = circ_all[I, base]
        mJ = circ_all[J, base]
    oI = offs[I]
    oJ = offs[J]
    for sub in range(1 << npas):
        P = 0
        Q = 0
        for i in range(npas):
            if (sub >> i) & 1:
                P |= 1 << pas_src[i]
                Q |= 1 << pas_tgt[i]
        src = A | P
        if mode == 1 and not (src >> mI) & 1:
            continue
        if mode == 2 and (src >> mI) & 1:
            continue
        for bi in range(nB):
            tgt = Bs[bi] | Q
            if mode == 1 and not (tgt >> mJ) & 1:
                continue
            if mode == 2 and (tgt >> mJ) & 1:
                continue
            if fill:
                if mode == 0:
                    out_s[pos] = oI + src
                    out_t[pos] = oJ + tgt
                else:
                    out_s[pos] = oI + _compress(src, mI)
                    out_t[pos] = oJ + _compress(tgt, mJ)
            pos += 1
    return pos


@njit(cache=True)
def _sigma(a_tail, a_head, b_head, L):
    """Chirality with chord ``a`` traversed on the left (positions given
    already in that traversal direction)."""
    x = (b_head - a_tail) % L
    y = (a_head - a_tail) % L
    return 1 if (0 < x and x < y) else 0


@njit(cache=True)
def _interleaved(a0, a1, b0, b1):
    lo = min(a0, a1)
    hi = max(a0, a1)
    inside = 0
    if lo < b0 < hi:
        inside += 1
    if lo < b1 < hi:
        inside += 1
    return inside == 1


@njit(cache=True)
def _bicliques(circle, bitmask_kind, I, n, ep_circ, ep_pos, ep_side, clen, want, found, nfound):
    """Store in ``found`` the crossing masks of all C-shapes on ``circle``.

    Chords are the crossings whose bit in ``I`` equals ``bitmask_kind`` and
    whose both endpoints lie on ``circle``.  Returns the number found.
    """
    left = np.empty(n, np.int64)
    right = np.empty(n, np.int64)
    nl = 0
    nr = 0
    for c in range(n):
        if ((I >> c) & 1) != bitmask_kind:
            continue
        if ep_circ[c, 0] != circle or ep_circ[c, 1] != circle:
            continue
        if ep_side[c, 0] > 0:
            left[nl] = c
            nl += 1
        else:
            right[nr] = c
            nr += 1
    if nl == 0 or nr == 0:
        return nfound
    L = clen[circle]
    compat = np.zeros(nl, np.int64)
    for i in range(nl):
        a = left[i]
        for j in range(nr):
            b = right[j]
            if not _interleaved(ep_pos[a, 0], ep_pos[a, 1], ep_pos[b, 0], ep_pos[b, 1]):
                continue
            if _sigma(ep_pos[a, 0], ep_pos[a, 1], ep_pos[b, 1], L) == want:
                compat[i] |= 1 << j
    # depth-first over left subsets in increasing index order
    stack_i = np.empty(nl + 1, np.int64)
    stack_common = np.empty(nl + 1, np.int64)
    stack_chosen = np.empty(nl + 1, np.int64)
    depth = 0
    stack_i[0] = 0
    stack_common[0] = (1 << nr) - 1
    stack_chosen[0] = 0
    while depth >= 0:
        i = stack_i[depth]
        if i >= nl:
            depth -= 1
            continue
        stack_i[depth] = i + 1
        common = stack_common[depth] & compat[i]
        if common == 0:
            continue
        chosen = stack_chosen[depth] | (1 << left[i])
        sub = common
        while sub:
            mask = chosen
            for j in range(nr):
                if (sub >> j) & 1:
                    mask |= 1 << right[j]
            if nfound >= found.shape[0]:
                return -1
            found[nfound] = mask
            nfound += 1
            sub = (sub - 1) & common
        depth += 1
        stack_i[depth] = i + 1
        stack_common[depth] = common
        stack_chosen[depth] = chosen
    return nfound


@njit(cache=True)
def _resolution_faces(I, n, tup, oc, op, ic, ip, t, sign, loops, circ_all, nc_all, offs,
                      mode, base, c_sigma, e_tail_first, out_s, out_t, pos, fill, found):
    E = tup.shape[0] * 2
    circ = np.empty(E, np.int64)
    ep_circ = np.full((n, 2), -1, np.int64)
    ep_pos = np.zeros((n, 2), np.int64)
    ep_side = np.zeros((n, 2), np.int64)
    ep_exit = np.zeros((n, 2), np.int64)
    clen = np.zeros(E + 1, np.int64)
    nc = _local(I, tup, oc, op, ic, ip, t, sign, circ, ep_circ, ep_pos, ep_side, ep_exit, clen)
    rep = np.empty(E + 1, np.int64)
    _rep_edges(circ, nc, rep)
    rep_other = np.empty(E + 1, np.int64)
    Bs = np.zeros(4, np.int64)
    pas_src = np.empty(E + loops + 1, np.int64)
    pas_tgt = np.empty(E + loops + 1, np.int64)
    full = (1 << n) - 1

    # -- 1-dimensional faces (Khovanov) --
    for c in range(n):
        if (I >> c) & 1:
            continue
        J = I | (1 << c)
        a = ep_circ[c, 0]
        b = ep_circ[c, 1]
        if a != b:
            y = circ_all[J, ep_exit[c, 0]]
            act = (1 << a) | (1 << b)
            Bs[0] = 0
            pos = _emit(I, J, 0, Bs, 1, act, rep, nc_all, loops, circ_all, offs, mode, base,
                        out_s, out_t, pos, fill, pas_src, pas_tgt)
            Bs[0] = 1 << y
            pos = _emit(I, J, 1 << b, Bs, 1, act, rep, nc_all, loops, circ_all, offs, mode, base,
                        out_s, out_t, pos, fill, pas_src, pas_tgt)
            pos = _emit(I, J, 1 << a, Bs, 1, act, rep, nc_all, loops, circ_all, offs, mode, base,
                        out_s, out_t, pos, fill, pas_src, pas_tgt)
        else:
            y1 = circ_all[J, ep_exit[c, 0]]
            y2 = circ_all[J, ep_exit[c, 1]]
            act = 1 << a
            Bs[0] = (1 << y1) | (1 << y2)
            pos = _emit(I, J, 1 << a, Bs, 1, act, rep, nc_all, loops, circ_all, offs, mode, base,
                        out_s, out_t, pos, fill, pas_src, pas_tgt)
            Bs[0] = 1 << y1
            Bs[1] = 1 << y2
            pos = _emit(I, J, 0, Bs, 2, act, rep, nc_all, loops, circ_all, offs, mode, base,
                        out_s, out_t, pos, fill, pas_src, pas_tgt)

    # -- A_k, k >= 2: arcs from circle a to circle b --
    group = np.empty(n, np.int64)
    for a in range(nc):
        for b in range(nc):
            if a == b:
                continue
            m = 0
            for c in range(n):
                if not (I >> c) & 1 and ep_circ[c, 0] == a and ep_circ[c, 1] == b:
                    group[m] = c
                    m += 1
            if m < 2:
                continue
            Bs[0] = 0
            act = (1 << a) | (1 << b)
            for sub in range(1, 1 << m):
                if _popcount(sub) < 2:
                    continue
                J = I
                for i in range(m):
                    if (sub >> i) & 1:
                        J |= 1 << group[i]
                pos = _emit(I, J, 0, Bs, 1, act, rep, nc_all, loops, circ_all, offs, mode, base,
                            out_s, out_t, pos, fill, pas_src, pas_tgt)

    # -- B_k, k >= 2: coherent cycles of circles --
    outdeg = np.zeros(nc, np.int64)
    outarc = np.empty((nc, n), np.int64)
    for c in range(n):
        if (I >> c) & 1:
            continue
        a = ep_circ[c, 0]
        b = ep_circ[c, 1]
        if a != b:
            outarc[a, outdeg[a]] = c
            outdeg[a] += 1
    path = np.empty(nc + 1, np.int64)
    it = np.zeros(nc + 1, np.int64)
    for root in range(nc):
        depth = 0
        it[0] = 0
        visited = 1 << root
        arcs = 0
        while depth >= 0:
            cur = root if depth == 0 else ep_circ[path[depth - 1], 1]
            pushed = False
            while it[depth] < outdeg[cur]:
                c = outarc[cur, it[depth]]
                it[depth] += 1
                h = ep_circ[c, 1]
                if h == root and depth >= 1:
                    sel = arcs | (1 << c)
                    J = I | sel
                    ymask = 0
                    for c2 in range(n):
                        if (sel >> c2) & 1:
                            ymask |= 1 << circ_all[J, ep_exit[c2, 0]]
                            ymask |= 1 << circ_all[J, ep_exit[c2, 1]]
                    Bs[0] = ymask
                    pos = _emit(I, J, visited, Bs, 1, visited, rep, nc_all, loops, circ_all, offs,
                                mode, base, out_s, out_t, pos, fill, pas_src, pas_tgt)
                    continue
                if h > root and not (visited >> h) & 1:
                    path[depth] = c
                    visited |= 1 << h
                    arcs |= 1 << c
                    depth += 1
                    it[depth] = 0
                    pushed = True
                    break
            if not pushed:
                depth -= 1
                if depth >= 0:
                    c = path[depth]
                    visited &= ~(1 << ep_circ[c, 1])
                    arcs &= ~(1 << c)

    # -- C_{p,q}: chord bicliques on one circle --
    for x in range(nc):
        nf = _bicliques(x, 0, I, n, ep_circ, ep_pos, ep_side, clen, c_sigma, found, 0)
        if nf < 0:
            return -1
        Bs[0] = 0
        for f in range(nf):
            J = I | found[f]
            pos = _emit(I, J, 0, Bs, 1, 1 << x, rep, nc_all, loops, circ_all, offs, mode, base,
                        out_s, out_t, pos, fill, pas_src, pas_tgt)

    # -- D_{p,q}: faces ending at I whose dual is a C-shape of opposite chirality --
    J = I
    for y in range(nc):
        nf = _bicliques(y, 1, J, n, ep_circ, ep_pos, ep_side, clen, 1 - c_sigma, found, 0)
        if nf < 0:
            return -1
        for f in range(nf):
            S = found[f]
            Isrc = J & (full ^ S)
            act = 0
            for c in range(n):
                if (S >> c) & 1:
                    act |= 1 << circ_all[Isrc, tup[c, 0]]
                    act |= 1 << circ_all[Isrc, tup[c, 2]]
            _rep_edges(circ_all[Isrc], nc_all[Isrc], rep_other)
            Bs[0] = 1 << y
            pos = _emit(Isrc, J, act, Bs, 1, act, rep_other, nc_all, loops, circ_all, offs, mode,
                        base, out_s, out_t, pos, fill, pas_src, pas_tgt)

    # -- E_{p,q}, k >= 2: center, leaves and adjacent chords --
    items = np.empty(n, np.int64)
    for x in range(nc):
        L = clen[x]
        ni = 0
        for c in range(n):
            if (I >> c) & 1:
                continue
            if ep_circ[c, 0] == x or ep_circ[c, 1] == x:
                items[ni] = c
                ni += 1
        if ni < 2:
            continue
        for d0 in range(2):
            pos = _center_faces(I, x, d0, items, ni, L, n, ep_circ, ep_pos, ep_side, ep_exit,
                                e_tail_first, rep, nc_all, loops, circ_all, offs, mode, base,
                                out_s, out_t, pos, fill, pas_src, pas_tgt, Bs)
    return pos


@njit(cache=True)
def _chord_state(c, pm, ep_pos, ep_side, e_tail_first):
    """(valid, cap_inner, direction) of chord ``c`` given chosen positions ``pm``."""
    pt = ep_pos[c, 0]
    ph = ep_pos[c, 1]
    lo = min(pt, ph)
    hi = max(pt, ph)
    inner = 0
    for k in range(lo + 1, hi):
        inner |= 1 << k
    rest = pm & ~((1 << lo) | (1 << hi))
    in_empty = (rest & inner) == 0
    out_empty = (rest & ~inner) == 0
    if not in_empty and not out_empty:
        return False, False, -1
    if in_empty and out_empty:
        return True, False, -1
    forward = ep_side[c, 0] > 0
    if in_empty:
        first = lo if forward else hi
    else:
        first = hi if forward else lo
    tail_first = first == pt
    direction = 1 if tail_first == (e_tail_first == 1) else 0
    return True, in_empty, direction


@njit(cache=True)
def _center_faces(I, x, d0, items, ni, L, n, ep_circ, ep_pos, ep_side, ep_exit, e_tail_first,
                  rep, nc_all, loops, circ_all, offs, mode, base, out_s, out_t, pos, fill,
                  pas_src, pas_tgt, Bs):
    # candidate items for direction d0
    cand = np.empty(ni, np.int64)
    is_chord = np.empty(ni, np.bool_)
    nc_ = 0
    for i in range(ni):
        c = items[i]
        chord = ep_circ[c, 0] == x and ep_circ[c, 1] == x
        if not chord:
            head_on_center = ep_circ[c, 1] == x
            if (1 if head_on_center else 0) != d0:
                continue
        cand[nc_] = c
        is_chord[nc_] = chord
        nc_ += 1
    if nc_ < 2:
        return pos
    # depth-first include/exclude with monotone pruning
    choice = np.zeros(nc_ + 1, np.int64)  # 0 = untried, 1 = included tried, 2 = done
    chosen = np.zeros(nc_, np.bool_)
    depth = 0
    pm = 0
    leafc = 0
    while depth >= 0:
        if depth == nc_:
            # evaluate the chosen set
            k = 0
            for i in range(nc_):
                if chosen[i]:
                    k += 1
            if k >= 2:
                ok = True
                body_edge = -1
                leaves = 0
                for i in range(nc_):
                    if not chosen[i]:
                        continue
                    c = cand[i]
                    if is_chord[i]:
                        valid, cap_inner, direction = _chord_state(c, pm, ep_pos, ep_side, e_tail_first)
                        if not valid or direction != d0:
                            ok = False
                            break
                        if body_edge < 0:
                            pt = ep_pos[c, 0]
                            ph = ep_pos[c, 1]
                            j_hi = 0 if pt > ph else 1
                            j_lo = 1 - j_hi
                            body_edge = ep_exit[c, j_hi] if cap_inner else ep_exit[c, j_lo]
                    else:
                        other = 1 if ep_circ[c, 0] == x else 0
                        leaves |= 1 << ep_circ[c, other]
                if ok:
                    # a leaf segment always lies in the body
                    for i in range(nc_):
                        if chosen[i] and not is_chord[i]:
                            c = cand[i]
                            other = 1 if ep_circ[c, 0] == x else 0
                            body_edge = ep_exit[c, other]
                            break
                    J = I
                    for i in range(nc_):
                        if chosen[i]:
                            J |= 1 << cand[i]
                    Bs[0] = 1 << circ_all[J, body_edge]
                    pos = _emit(I, J, leaves, Bs, 1, leaves | (1 << x), rep, nc_all, loops,
                                circ_all, offs, mode, base, out_s, out_t, pos, fill, pas_src, pas_tgt)
            depth -= 1
            continue
        c = cand[depth]
        if choice[depth] == 0:
            choice[depth] = 1
            # try including
            feasible = True
            if is_chord[depth]:
                npm = pm | (1 << ep_pos[c, 0]) | (1 << ep_pos[c, 1])
            else:
                other = 1 if ep_circ[c, 0] == x else 0
                oc_ = ep_circ[c, other]
                if (leafc >> oc_) & 1:
                    feasible = False
                j = 0 if ep_circ[c, 0] == x else 1
                npm = pm | (1 << ep_pos[c, j])
            if feasible:
                for i in range(depth):
                    if chosen[i] and is_chord[i]:
                        valid, cap_inner, direction = _chord_state(cand[i], npm, ep_pos, ep_side, e_tail_first)
                        if not valid or (direction >= 0 and direction != d0):
                            feasible = False
                            break
            if feasible and is_chord[depth]:
                valid, cap_inner, direction = _chord_state(c, npm, ep_pos, ep_side, e_tail_first)
                if not valid or (direction >= 0 and direction != d0):
                    feasible = False
            if feasible:
                chosen[depth] = True
                pm = npm
                if not is_chord[depth]:
                    other = 1 if ep_circ[c, 0] == x else 0
                    leafc |= 1 << ep_circ[c, other]
                depth += 1
                choice[depth] = 0
            continue
        if choice[depth] == 1:
            choice[depth] = 2
            # undo inclusion if it happened, then try excluding
            if chosen[depth]:
                chosen[depth] = False
                if is_chord[depth]:
                    pm &= ~((1 << ep_pos[c, 0]) | (1 << ep_pos[c, 1]))
                else:
                    j = 0 if ep_circ[c, 0] == x else 1
                    pm &= ~(1 << ep_pos[c, j])
                    other = 1 - j
                    leafc &= ~(1 << ep_circ[c, other])
            depth += 1
            choice[depth] = 0
            continue
        # both branches done
        depth -= 1
    return pos


@njit(cache=True)
def all_circles(n, tup, oc, op, ic, ip, E):
    N = 1 << n
    circ_all = np.empty((N, E), np.int8)
    nc_all = np.empty(N, np.int64)
    circ = np.empty(E, np.int64)
    for I in range(N):
        nc_all[I] = _circles(I, tup, oc, op, ic, ip, circ)
        for e in range(E):
            circ_all[I, e] = circ[e]
    return circ_all, nc_all


@njit(parallel=True, cache=True)
def count_entries(n, tup, oc, op, ic, ip, t, sign, loops, circ_all, nc_all, offs, mode, base,
                  c_sigma, e_tail_first, cap):
    N = 1 << n
    counts = np.zeros(N, np.int64)
    dummy = np.empty(0, np.int64)
    for I in prange(N):
        found = np.empty(cap, np.int64)
        counts[I] = _resolution_faces(np.int64(I), n, tup, oc, op, ic, ip, t, sign, loops, circ_all, nc_all,
                                      offs, mode, base, c_sigma, e_tail_first, dummy, dummy, 0,
                                      False, found)
    return counts


@njit(parallel=True, cache=True)
def fill_entries(n, tup, oc, op, ic, ip, t, sign, loops, circ_all, nc_all, offs, mode, base,
                 c_sigma, e_tail_first, cap, starts, out_s, out_t):
    N = 1 << n
    for I in prange(N):
        found = np.empty(cap, np.int64)
        _resolution_faces(np.int64(I), n, tup, oc, op, ic, ip, t, sign, loops, circ_all, nc_all, offs, mode,
                          base, c_sigma, e_tail_first, out_s, out_t, starts[I], True, found)
