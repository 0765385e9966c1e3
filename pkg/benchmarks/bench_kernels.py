#!/usr/bin/env python3
"""Benchmark the compiled bitset kernels against the numpy fallback.

Runs both backends on identical synthetic inputs (and one end-to-end
triangle-free process run) and prints a timing table.  The two backends must
also agree bit for bit; this script asserts that while it times them.
"""
import argparse
import time

import numpy as np

from greedyproc import _fallback, trifree

try:
    from greedyproc import _speedups
except ImportError:
    _speedups = None


def _synthetic(n, n_edges, seed):
    rng = np.random.default_rng(seed)
    words = (n + 63) // 64
    tbits = np.zeros((n, words), dtype=np.uint64)
    us = rng.integers(n, size=n_edges).astype(np.int32)
    vs = ((us + 1 + rng.integers(n - 1, size=n_edges)) % n).astype(np.int32)
    return tbits, us, vs


def bench(fn, *args, repeats=3):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_kernel_benchmarks(n, n_edges, seed):
    rows = []
    for name in ("accept_batch", "mark_closed", "count_between"):
        times = {}
        results = {}
        for label, impl in (("compiled", _speedups), ("python", _fallback)):
            if impl is None:
                continue
            tbits, us, vs = _synthetic(n, n_edges, seed)
            if name == "accept_batch":
                dt, res = bench(impl.accept_batch, tbits, us, vs)
            elif name == "mark_closed":
                ebits = np.zeros_like(tbits)
                impl.accept_batch(ebits, us, vs)
                obits = np.empty_like(tbits)
                obits.fill(np.uint64(0xFFFFFFFFFFFFFFFF))
                dt, res = bench(impl.mark_closed, obits, ebits,
                                us[: n_edges // 4], vs[: n_edges // 4],
                                repeats=1)
            else:
                impl.accept_batch(tbits, us, vs)
                rows_sel = np.arange(0, n, 2, dtype=np.int32)
                colmask = np.empty(tbits.shape[1], dtype=np.uint64)
                colmask.fill(np.uint64(0x5555555555555555))
                dt, res = bench(impl.count_between, tbits, rows_sel, colmask)
            times[label] = dt
            results[label] = np.asarray(res)
        if len(results) == 2:
            assert np.array_equal(results["compiled"], results["python"]), name
        rows.append((name, times))
    return rows


def run_end_to_end(n, seed):
    from greedyproc import kernels
    params = trifree.TriFreeParams.from_n(n)
    times = {}
    edges = {}
    saved = kernels._impl
    try:
        for label, impl in (("compiled", _speedups), ("python", _fallback)):
            if impl is None:
                continue
            kernels._impl = impl
            t0 = time.perf_counter()
            rep = trifree.run(params, seed)
            times[label] = time.perf_counter() - t0
            edges[label] = rep.edges
    finally:
        kernels._impl = saved
    if len(edges) == 2:
        assert np.array_equal(edges["compiled"][0], edges["python"][0])
        assert np.array_equal(edges["compiled"][1], edges["python"][1])
    return times


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--edges", type=int, default=200000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--e2e-n", type=int, default=1024)
    args = ap.parse_args()

    if _speedups is None:
        print("compiled extension unavailable; timing fallback only")
    print(f"{'kernel':<16}{'compiled':>12}{'python':>12}{'speedup':>10}")
    for name, times in run_kernel_benchmarks(args.n, args.edges, args.seed):
        c = times.get("compiled", float("nan"))
        p = times.get("python", float("nan"))
        print(f"{name:<16}{c:>11.4f}s{p:>11.4f}s{p / c:>9.1f}x")
    times = run_end_to_end(args.e2e_n, args.seed)
    c = times.get("compiled", float("nan"))
    p = times.get("python", float("nan"))
    print(f"{'trifree n=' + str(args.e2e_n):<16}{c:>11.4f}s{p:>11.4f}s"
          f"{p / c:>9.1f}x")


if __name__ == "__main__":
    main()
