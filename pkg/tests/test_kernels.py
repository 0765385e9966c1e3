"""Backend equivalence and contract tests for the bitset kernels."""

import os
import subprocess
import sys

import numpy as np
import pytest

from greedyproc import _fallback, kernels

try:
    from greedyproc import _speedups
except ImportError:
    _speedups = None

BOTH = [pytest.param(_fallback, id="python")]
if _speedups is not None:
    BOTH.append(pytest.param(_speedups, id="compiled"))


def _rand_bits(n, rng):
    words = (n + 63) // 64
    bits = rng.integers(0, 2, size=(n, words * 64), dtype=np.uint8)
    bits[:, n:] = 0
    packed = np.packbits(bits, axis=1, bitorder="little").view(np.uint64)
    return np.ascontiguousarray(packed)


def _rand_edges(n, m, rng):
    us = rng.integers(n, size=m).astype(np.int32)
    vs = ((us + 1 + rng.integers(n - 1, size=m)) % n).astype(np.int32)
    return us, vs


@pytest.mark.skipif(_speedups is None, reason="no compiled extension")
def test_backends_agree_accept_batch():
    rng = np.random.default_rng(0)
    for n in (70, 200):
        us, vs = _rand_edges(n, 500, rng)
        t1 = np.zeros((n, (n + 63) // 64), dtype=np.uint64)
        t2 = t1.copy()
        a = _speedups.accept_batch(t1, us, vs)
        b = _fallback.accept_batch(t2, us, vs)
        assert np.array_equal(a, b)
        assert np.array_equal(t1, t2)


@pytest.mark.skipif(_speedups is None, reason="no compiled extension")
def test_backends_agree_mark_closed():
    rng = np.random.default_rng(1)
    n = 130
    us, vs = _rand_edges(n, 80, rng)
    ebits = np.zeros((n, (n + 63) // 64), dtype=np.uint64)
    _fallback.accept_batch(ebits, us, vs)
    o1 = _rand_bits(n, rng)
    for v in range(n):
        o1[v, v >> 6] &= ~(np.uint64(1) << np.uint64(v & 63))
    o2 = o1.copy()
    c1 = _speedups.mark_closed(o1, ebits, us, vs)
    c2 = _fallback.mark_closed(o2, ebits, us, vs)
    assert np.array_equal(c1, c2)
    assert np.array_equal(o1, o2)


@pytest.mark.skipif(_speedups is None, reason="no compiled extension")
def test_backends_agree_first_triangle_and_count():
    rng = np.random.default_rng(2)
    n = 96
    tbits = _rand_bits(n, rng)
    us, vs = _rand_edges(n, 60, rng)
    assert _speedups.first_triangle(tbits, us, vs) \
        == _fallback.first_triangle(tbits, us, vs)
    rows = np.arange(0, n, 3, dtype=np.int32)
    colmask = np.ascontiguousarray(_rand_bits(n, rng)[0])
    assert _speedups.count_between(tbits, rows, colmask) \
        == _fallback.count_between(tbits, rows, colmask)


@pytest.mark.parametrize("impl", BOTH)
def test_accept_batch_rejects_triangles(impl):
    n = 8
    tbits = np.zeros((n, 1), dtype=np.uint64)
    us = np.array([0, 1, 0], dtype=np.int32)
    vs = np.array([1, 2, 2], dtype=np.int32)
    out = impl.accept_batch(tbits, us, vs)
    assert out.tolist() == [1, 1, 0]


@pytest.mark.parametrize("impl", BOTH)
def test_first_triangle_detects(impl):
    n = 8
    tbits = np.zeros((n, 1), dtype=np.uint64)
    impl.accept_batch(tbits, np.array([0, 1], dtype=np.int32),
                      np.array([1, 2], dtype=np.int32))
    probe_u = np.array([3, 0], dtype=np.int32)
    probe_v = np.array([4, 2], dtype=np.int32)
    assert impl.first_triangle(tbits, probe_u, probe_v) == 1


@pytest.mark.parametrize("impl", BOTH)
def test_mark_closed_closes_both_orientations(impl):
    n = 8
    words = 1
    ebits = np.zeros((n, words), dtype=np.uint64)
    impl.accept_batch(ebits, np.array([0, 1], dtype=np.int32),
                      np.array([2, 2], dtype=np.int32))
    obits = np.zeros((n, words), dtype=np.uint64)
    # open edge (0, 1); it forms a triangle with E-edges 0-2 and 1-2
    obits[0] |= np.uint64(1) << np.uint64(1)
    obits[1] |= np.uint64(1) << np.uint64(0)
    closed = impl.mark_closed(obits, ebits, np.array([0], dtype=np.int32),
                              np.array([2], dtype=np.int32))
    assert closed.tolist() == [0 * n + 1]
    assert obits.sum() == 0


def test_wrapper_coerces_dtypes():
    tbits = np.zeros((8, 1), dtype=np.uint64)
    out = kernels.accept_batch(tbits, np.array([0], dtype=np.int64),
                               np.array([1], dtype=np.int64))
    assert out.tolist() == [1]


def test_pure_env_forces_python_backend():
    env = dict(os.environ, GREEDYPROC_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from greedyproc import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
