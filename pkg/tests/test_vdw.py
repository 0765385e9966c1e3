"""Tests for the van der Waerden witness pipeline and exact oracle."""

import itertools
import math

import numpy as np
import pytest
import sympy

from greedyproc import apfree, vdw


def _quadratic_scan(coloring, r, k):
    """Independent quadratic scanner: first red r-AP, longest blue AP."""
    n = coloring.n
    red = coloring.red
    red_ap = None
    for d in range(1, n):
        for a in range(1, n - (r - 1) * d + 1):
            if all(a + j * d in red for j in range(r)):
                red_ap = tuple(a + j * d for j in range(r))
                break
        if red_ap:
            break
    longest = 0
    for d in range(1, n):
        for a in range(1, n + 1):
            length = 0
            x = a
            while x <= n and x not in red:
                length += 1
                x += d
            longest = max(longest, length)
    return red_ap, longest


def test_check_coloring_examples():
    c = vdw.Coloring.make(8, {1, 2, 4, 5})
    assert vdw.check_coloring(c, 3, 3).red_ap is None
    c = vdw.Coloring.make(3, set())
    v = vdw.check_coloring(c, 3, 3)
    assert v.blue_ap == (1, 2, 3)
    c = vdw.Coloring.make(6, set(range(1, 7)))
    assert vdw.check_coloring(c, 3, 3).longest_blue_ap == 0


def test_coloring_invariants():
    with pytest.raises(vdw.VdwError):
        vdw.Coloring.make(5, {0})
    with pytest.raises(vdw.VdwError):
        vdw.Coloring.make(5, {6})


def test_check_coloring_against_quadratic_scanner():
    rng = np.random.default_rng(0)
    for trial in range(200):
        n = int(rng.integers(2, 80))
        red = set(int(x) for x in rng.choice(
            np.arange(1, n + 1), size=int(rng.integers(0, n + 1)),
            replace=False))
        c = vdw.Coloring.make(n, red)
        r = int(rng.integers(2, 5))
        k = int(rng.integers(2, 5))
        verdict = vdw.check_coloring(c, r, k)
        red_ap, longest = _quadratic_scan(c, r, k)
        assert (verdict.red_ap is None) == (red_ap is None)
        if verdict.red_ap is not None:
            assert verdict.red_ap == red_ap
        assert verdict.longest_blue_ap == longest
        assert (verdict.blue_ap is not None) == (longest >= k)
        if verdict.blue_ap is not None:
            # reported blue AP really is a blue k-AP in [n]
            ap = verdict.blue_ap
            assert len(ap) == k
            diffs = {b - a for a, b in zip(ap, ap[1:])}
            assert len(diffs) == 1
            assert all(1 <= x <= n and x not in red for x in ap)


def _every_coloring_forced(r, k, n):
    """Brute force: every 2-coloring of [n] has a red r-AP or blue k-AP."""
    for bits in itertools.product((0, 1), repeat=n):
        red = {i + 1 for i in range(n) if bits[i]}
        if vdw.check_coloring(vdw.Coloring.make(n, red), r, k).clean:
            return False
    return True


@pytest.mark.parametrize("r,k,value", [(2, 2, 3), (3, 3, 9)])
def test_exact_vdw_matches_exhaustive_enumeration(r, k, value):
    res = vdw.exact_vdw(r, k, n_max=40)
    assert res["value"] == value
    assert not _every_coloring_forced(r, k, value - 1)
    assert _every_coloring_forced(r, k, value)


def test_exact_vdw_certificate_clean():
    res = vdw.exact_vdw(3, 3, n_max=40)
    cert = res["certificate"]
    assert cert.n == res["value"] - 1
    assert vdw.check_coloring(cert, 3, 3).clean


def test_exact_vdw_exceeds_bound():
    res = vdw.exact_vdw(3, 3, n_max=5)
    assert res["exceeds_bound"]
    assert res["value"] is None
    assert res["certificate"].n == 5
    assert vdw.check_coloring(res["certificate"], 3, 3).clean


def test_exact_vdw_validation():
    with pytest.raises(vdw.VdwError):
        vdw.exact_vdw(1, 3)
    with pytest.raises(vdw.VdwError):
        vdw.exact_vdw(3, 3, n_max=0)


def test_select_modulus_definition_and_monotonicity():
    for k in (100, 200, 500):
        N = vdw.select_modulus(3, k, 1.0)
        assert sympy.isprime(N)
        assert vdw.threshold_k(3, 1.0, N) <= k
        assert vdw.threshold_k(3, 1.0, int(sympy.nextprime(N))) > k
    assert vdw.select_modulus(3, 101, 1.0) >= vdw.select_modulus(3, 100, 1.0)


def test_select_modulus_independent_scan():
    # independent oracle: scan all primes up to 10^6 for the last one whose
    # threshold stays below k
    k, C = 100, 1.0
    best = None
    for N in sympy.primerange(2, 10 ** 6):
        if vdw.threshold_k(3, C, N) <= k:
            best = N
    assert vdw.select_modulus(3, k, C) == best


def test_select_modulus_no_qualifying_prime():
    with pytest.raises(vdw.VdwError):
        vdw.select_modulus(3, 2, 50.0, N0=100)


def test_build_coloring():
    c = vdw.build_coloring(set(), 13)
    assert c.n == 12 and c.red == frozenset()
    c = vdw.build_coloring({0, 1, 12, 5}, 13)
    assert 0 not in c.red
    assert c.red == {1, 12, 5}


def test_witness_pipeline_small():
    k = vdw.threshold_k(3, 7.0, 101)
    res = vdw.lower_bound_witness(3, k, seed=1, C=7.0)
    assert res.n == res.N - 1
    # red set is AP-free in the integers whenever it is ring-AP-free
    assert res.verdict.red_ap is None
    assert res.metadata["ratio"] > 0


def test_witness_stable_under_reverification(tmp_path):
    k = vdw.threshold_k(3, 7.0, 101)
    res = vdw.lower_bound_witness(3, k, seed=4, C=7.0)
    path = tmp_path / "coloring.txt"
    vdw.write_coloring(path, res.coloring)
    reloaded = vdw.read_coloring(path)
    assert reloaded == res.coloring
    v2 = vdw.check_coloring(reloaded, 3, k)
    assert v2.to_dict() == res.verdict.to_dict()


def test_coloring_file_format(tmp_path):
    path = tmp_path / "c.txt"
    vdw.write_coloring(path, vdw.Coloring.make(8, {2, 5, 7}))
    lines = path.read_text().splitlines()
    assert lines[0] == "n=8"
    assert lines[1] == "2 5 7"
    with pytest.raises(vdw.VdwError):
        bad = tmp_path / "bad.txt"
        bad.write_text("8\n1 2\n")
        vdw.read_coloring(bad)
