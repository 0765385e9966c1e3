# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Bitset kernels for the semi-random triangle-free process.

Adjacency matrices are packed little-endian into uint64 words: bit ``v`` of
row ``u`` lives in ``bits[u, v >> 6]`` at position ``v & 63``.  The numpy
fallback in ``_fallback.py`` implements the same contracts; results must be
identical bit for bit so that runs replay across both backends.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

ctypedef cnp.uint64_t u64
ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32


def accept_batch(u64[:, ::1] tbits, i32[::1] us, i32[::1] vs):
    """Greedy triangle-free acceptance, sequential in the given edge order.

    Accepts edge (u, v) iff u and v have no common neighbor among edges
    accepted so far (including the pre-existing graph in ``tbits``); accepted
    edges are written into ``tbits``.  Returns a uint8 mask over the batch.
    """
    cdef Py_ssize_t m = us.shape[0]
    cdef Py_ssize_t w = tbits.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(m, dtype=np.uint8)
    cdef Py_ssize_t e, k
    cdef int u, v
    cdef u64 acc
    for e in range(m):
        u = us[e]
        v = vs[e]
        acc = 0
        for k in range(w):
            acc |= tbits[u, k] & tbits[v, k]
            if acc:
                break
        if acc == 0:
            tbits[u, v >> 6] |= (<u64>1) << (v & 63)
            tbits[v, u >> 6] |= (<u64>1) << (u & 63)
            out[e] = 1
    return out


def mark_closed(u64[:, ::1] obits, u64[:, ::1] ebits, i32[::1] us, i32[::1] vs):
    """Close every open edge that forms a triangle with the new edges.

    For each new edge (u, v) already present in ``ebits``, any open edge
    (u, x) with vx in E, or (v, x) with ux in E, is removed from ``obits``
    (both orientations).  Returns the canonical ids (min*n + max) of the
    closed edges, sorted ascending and deduplicated by construction.
    """
    cdef Py_ssize_t m = us.shape[0]
    cdef Py_ssize_t n = obits.shape[0]
    cdef Py_ssize_t w = obits.shape[1]
    out = []
    cdef Py_ssize_t e, k
    cdef int u, v, x, side
    cdef int a, b
    cdef u64 word
    cdef i64 n64 = n
    for e in range(m):
        for side in range(2):
            u = us[e] if side == 0 else vs[e]
            v = vs[e] if side == 0 else us[e]
            for k in range(w):
                word = obits[u, k] & ebits[v, k]
                while word:
                    x = (k << 6) + _ctz(word)
                    word &= word - 1
                    obits[u, x >> 6] &= ~((<u64>1) << (x & 63))
                    obits[x, u >> 6] &= ~((<u64>1) << (u & 63))
                    a = u if u < x else x
                    b = x if u < x else u
                    out.append(a * n64 + b)
    arr = np.array(out, dtype=np.int64)
    arr.sort()
    return arr


cdef inline int _ctz(u64 word) nogil:
    cdef int c = 0
    while (word & 1) == 0:
        word >>= 1
        c += 1
    return c


def first_triangle(u64[:, ::1] tbits, i32[::1] us, i32[::1] vs):
    """Index of the first edge in the list whose endpoints share a neighbor,
    or -1 if the edge set is triangle-free."""
    cdef Py_ssize_t m = us.shape[0]
    cdef Py_ssize_t w = tbits.shape[1]
    cdef Py_ssize_t e, k
    cdef int u, v
    for e in range(m):
        u = us[e]
        v = vs[e]
        for k in range(w):
            if tbits[u, k] & tbits[v, k]:
                return e
    return -1


def count_between(u64[:, ::1] tbits, i32[::1] rows, u64[::1] colmask):
    """Number of (row, col) adjacency bits with row in ``rows`` and col in
    the bitmask ``colmask``."""
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t w = tbits.shape[1]
    cdef Py_ssize_t e, k
    cdef long long total = 0
    cdef int u
    for e in range(m):
        u = rows[e]
        for k in range(w):
            total += __builtin_popcountll(tbits[u, k] & colmask[k])
    return total
