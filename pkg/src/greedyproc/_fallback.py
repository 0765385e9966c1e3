"""Pure-numpy implementations of the bitset kernels.

Same contracts as ``_speedups.pyx``; see the docstrings there.  Selected at
import time by ``kernels`` when the compiled extension is missing or when
``GREEDYPROC_PURE=1``.
"""
import numpy as np

BACKEND = "python"


def accept_batch(tbits, us, vs):
    m = len(us)
    out = np.zeros(m, dtype=np.uint8)
    for e in range(m):
        u, v = int(us[e]), int(vs[e])
        if not np.bitwise_and(tbits[u], tbits[v]).any():
            tbits[u, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
            tbits[v, u >> 6] |= np.uint64(1) << np.uint64(u & 63)
            out[e] = 1
    return out


def mark_closed(obits, ebits, us, vs):
    n = obits.shape[0]
    out = []
    for e in range(len(us)):
        for u, v in ((int(us[e]), int(vs[e])), (int(vs[e]), int(us[e]))):
            hit = np.bitwise_and(obits[u], ebits[v])
            if not hit.any():
                continue
            xs = _bits_to_indices(hit)
            for x in xs:
                obits[u, x >> 6] &= ~(np.uint64(1) << np.uint64(x & 63))
                obits[x, u >> 6] &= ~(np.uint64(1) << np.uint64(u & 63))
                a, b = (u, x) if u < x else (x, u)
                out.append(a * n + b)
    arr = np.array(out, dtype=np.int64)
    arr.sort()
    return arr


def _bits_to_indices(words):
    bytes_ = words.view(np.uint8)
    bits = np.unpackbits(bytes_, bitorder="little")
    return np.flatnonzero(bits)


def first_triangle(tbits, us, vs):
    for e in range(len(us)):
        u, v = int(us[e]), int(vs[e])
        if np.bitwise_and(tbits[u], tbits[v]).any():
            return e
    return -1


def count_between(tbits, rows, colmask):
    if len(rows) == 0:
        return 0
    sel = tbits[np.asarray(rows, dtype=np.intp)]
    return int(np.bitwise_count(np.bitwise_and(sel, colmask)).sum())
