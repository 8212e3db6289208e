"""Bitset backtracking kernel shared by every containment search.

A pattern on ``k`` positions is embedded into a host graph on ``n`` vertices
given as two bitset tables ``nbr[0][v]`` (out-neighbours) and ``nbr[1][v]``
(in-neighbours).  ``rel[i, j]`` for ``i < j`` says which table of the vertex
placed at position ``i`` the vertex at position ``j`` must lie in (``-1``: no
constraint).  ``domain[p]`` restricts position ``p`` up front.  Every node of
the search forward-checks all later positions, so dead branches are cut as
soon as any future position has no candidate left.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_ONE = np.uint64(1)


@njit(cache=True)
def _ctz(x):
    n = 0
    if (x & np.uint64(0xFFFFFFFF)) == np.uint64(0):
        n += 32
        x = x >> np.uint64(32)
    if (x & np.uint64(0xFFFF)) == np.uint64(0):
        n += 16
        x = x >> np.uint64(16)
    if (x & np.uint64(0xFF)) == np.uint64(0):
        n += 8
        x = x >> np.uint64(8)
    if (x & np.uint64(0xF)) == np.uint64(0):
        n += 4
        x = x >> np.uint64(4)
    if (x & np.uint64(0x3)) == np.uint64(0):
        n += 2
        x = x >> np.uint64(2)
    if (x & np.uint64(0x1)) == np.uint64(0):
        n += 1
    return n


@njit(cache=True)
def _search(nbr, rel, domain, chosen):
    k = domain.shape[0]
    W = domain.shape[1]
    if k == 0:
        return True
    fc = np.empty((k + 1, k, W), np.uint64)
    rem = np.empty((k, W), np.uint64)
    for p in range(k):
        for w in range(W):
            fc[0, p, w] = domain[p, w]
    for w in range(W):
        rem[0, w] = fc[0, 0, w]
    zero = np.uint64(0)
    d = 0
    while d >= 0:
        v = -1
        for w in range(W):
            x = rem[d, w]
            if x != zero:
                low = x & (~x + np.uint64(1))
                rem[d, w] = x ^ low
                v = w * 64 + _ctz(low)
                break
        if v < 0:
            d -= 1
            continue
        ok = True
        for i in range(d):
            if chosen[i] == v:
                ok = False
                break
        if not ok:
            continue
        chosen[d] = v
        if d == k - 1:
            return True
        for p in range(d + 1, k):
            r = rel[d, p]
            nonempty = False
            for w in range(W):
                if r < 0:
                    y = fc[d, p, w]
                else:
                    y = fc[d, p, w] & nbr[r, v, w]
                fc[d + 1, p, w] = y
                if y != zero:
                    nonempty = True
            if not nonempty:
                ok = False
                break
        if not ok:
            continue
        d += 1
        for w in range(W):
            rem[d, w] = fc[d, d, w]
    return False


def words(n: int) -> int:
    return max(1, (n + 63) // 64)


def bitset_rows(n: int, rows, cols) -> np.ndarray:
    """``(n, W)`` table with bit ``cols[i]`` set in row ``rows[i]``."""
    table = np.zeros((n, words(n)), dtype=np.uint64)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.size:
        bits = np.left_shift(_ONE, (cols % 64).astype(np.uint64))
        np.bitwise_or.at(table, (rows, cols // 64), bits)
    return table


def vertex_mask(n: int, vertices) -> np.ndarray:
    row = np.zeros(words(n), dtype=np.uint64)
    for v in vertices:
        row[v // 64] |= _ONE << np.uint64(v % 64)
    return row


def find_embedding(nbr: np.ndarray, rel: np.ndarray, domain: np.ndarray) -> tuple[int, ...] | None:
    """Vertices for each pattern position, or None when no embedding exists."""
    k = domain.shape[0]
    chosen = np.full(max(k, 1), -1, dtype=np.int64)
    found = _search(
        np.ascontiguousarray(nbr, dtype=np.uint64),
        np.ascontiguousarray(rel, dtype=np.int64),
        np.ascontiguousarray(domain, dtype=np.uint64),
        chosen,
    )
    return tuple(int(v) for v in chosen[:k]) if found else None
