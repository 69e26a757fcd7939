"""Compiled column reduction of a δ-graded, h-filtered F2 complex.

Generators are ordered by h descending, so every prefix is a subcomplex.
Columns (sources) are reduced left to right within each δ block, highest δ
first, so that a generator already paired as a target can be skipped
(its reduced column is zero).  Each pivot pair (target, source) with h-gap
ℓ is a pair of generators cancelled by the page differential d^ℓ.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _symdiff(a, na, b, nb, out):
    i = 0
    j = 0
    k = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@njit(cache=True)
def reduce_columns(ptr, idx, pos_of, gen_at, order):
    """Return ``partner[g]``: the generator cancelled against ``g``, or -1."""
    N = pos_of.shape[0]
    partner = np.full(N, -1, np.int64)
    owner = np.full(N, -1, np.int64)  # row position -> column generator
    start = np.zeros(N, np.int64)
    length = np.zeros(N, np.int64)
    pool = np.empty(max(16, 2 * idx.shape[0]), np.int64)
    used = 0
    work = np.empty(64, np.int64)
    tmp = np.empty(64, np.int64)
    for oi in range(order.shape[0]):
        g = order[oi]
        if partner[g] != -1:
            continue
        nw = ptr[g + 1] - ptr[g]
        if nw == 0:
            continue
        if work.shape[0] < nw:
            work = np.empty(2 * nw, np.int64)
        for r in range(nw):
            work[r] = pos_of[idx[ptr[g] + r]]
        work[:nw].sort()
        while nw > 0:
            low = work[nw - 1]
            k = owner[low]
            if k == -1:
                break
            nb = length[k]
            if tmp.shape[0] < nw + nb:
                tmp = np.empty(2 * (nw + nb), np.int64)
            nw = _symdiff(work, nw, pool[start[k]:start[k] + nb], nb, tmp)
            work, tmp = tmp, work
        if nw == 0:
            continue
        low = work[nw - 1]
        owner[low] = g
        tgt = gen_at[low]
        partner[g] = tgt
        partner[tgt] = g
        if used + nw > pool.shape[0]:
            grown = np.empty(2 * (used + nw), np.int64)
            grown[:used] = pool[:used]
            pool = grown
        pool[used:used + nw] = work[:nw]
        start[g] = used
        length[g] = nw
        used += nw
    return partner
