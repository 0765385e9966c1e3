"""Tests for the semi-random triangle-free process."""

import math

import numpy as np
import pytest

from greedyproc import trifree


@pytest.fixture(scope="module")
def params64():
    return trifree.TriFreeParams.from_n(64)


@pytest.fixture(scope="module")
def report64(params64):
    return trifree.run(params64, seed=0, tstar_samples=20, tplus_samples=20)


def test_params_formulas():
    n = 1024
    p = trifree.TriFreeParams.from_n(n, beta=0.05)
    logn = math.log(n)
    assert p.sigma == pytest.approx(logn ** -2)
    assert p.p == pytest.approx(p.sigma / math.sqrt(n))
    assert p.rho == pytest.approx(math.sqrt(0.05 * logn / n))
    assert p.paper_steps == math.ceil(n ** 0.05)
    assert p.s == math.ceil((108 / 0.1 ** 2) * logn / p.rho)
    assert p.s_eff == min(p.s, n // 4)
    assert p.p < 1 and p.s_eff < n


def test_params_validation():
    with pytest.raises(trifree.TriFreeError):
        trifree.TriFreeParams.from_n(1024, beta=0.2)
    with pytest.raises(trifree.TriFreeError):
        trifree.TriFreeParams.from_n(1024, beta=0.0)
    with pytest.raises(trifree.TriFreeError):
        trifree.TriFreeParams.from_n(8)


def test_pi_q_recursion_examples():
    p = trifree.TriFreeParams.from_n(256)
    pi, q = trifree.pi_q_sequences(p)
    assert pi[0] == pytest.approx(p.sigma)
    assert pi[1] == pytest.approx(2 * p.sigma)  # q_0 = 1
    assert q[0] == 1.0
    assert (np.diff(q) <= 0).all()
    assert (q > 0).all() and (q <= 1).all()
    assert (np.diff(pi) > 0).all()


@pytest.mark.parametrize("n", [4096, 8192, 65536])
def test_stop_rule_lands_near_rho(n):
    p = trifree.TriFreeParams.from_n(n)
    pi, _ = trifree.pi_q_sequences(p)
    ratio = pi[-1] / math.sqrt(n)
    assert 0.5 * p.rho <= ratio <= 2 * p.rho


def test_step_counters_consistent(params64):
    state = trifree.TriFreeState(params64, seed=1)
    for _ in range(params64.steps):
        before = state.o_count
        rec = state.step()
        assert rec["oCount"] == before - rec["sampled"] - rec["closed"] \
            - rec["extraRemoved"]
        assert 0 <= rec["deleted"] <= rec["sampled"]
        assert state.t_is_triangle_free()


def test_final_invariants(params64, report64):
    state = report64.metadata["state"]
    # T subset of E, O disjoint from E
    assert (state.tbits & ~state.ebits == 0).all()
    assert (state.obits & state.ebits == 0).all()
    assert report64.triangle_free
    # openness: every open pair is addable to T without creating a triangle
    n = params64.n
    for u in range(n):
        for w in range(state.words):
            word = int(state.obits[u, w])
            while word:
                v = (w << 6) + (word & -word).bit_length() - 1
                word &= word - 1
                assert not (state.tbits[u] & state.tbits[v]).any()


def test_edges_sorted_canonical(report64):
    us, vs = report64.edges
    assert (us < vs).all()
    ids = us * 10 ** 6 + vs
    assert (np.diff(ids) > 0).all()


def test_deterministic_replay(params64):
    a = trifree.run(params64, seed=42)
    b = trifree.run(params64, seed=42)
    assert np.array_equal(a.edges[0], b.edges[0])
    assert np.array_equal(a.edges[1], b.edges[1])
    assert a.trajectory == b.trajectory
    c = trifree.run(params64, seed=43)
    assert not (len(c.edges[0]) == len(a.edges[0])
                and np.array_equal(c.edges[0], a.edges[0])
                and np.array_equal(c.edges[1], a.edges[1]))


def test_event_report(report64):
    er = report64.event_report
    assert er.tstar_samples == 20 and er.tplus_samples == 20
    assert er.consistency_checked > 0
    # the two counting methods agree on every cross-checked sample
    assert er.consistency_ok


def test_graph_view_roundtrip(params64, report64):
    us, vs = report64.edges
    view = trifree.graph_view(params64, us, vs, seed=0)
    vu, vv = view.t_edges()
    assert np.array_equal(vu, us) and np.array_equal(vv, vs)
    assert view.t_is_triangle_free()
    er = trifree.event_checks(view, tstar_samples=5, tplus_samples=5)
    assert er.consistency_ok


def test_graph_view_rejects_bad_edges(params64):
    with pytest.raises(trifree.TriFreeError):
        trifree.graph_view(params64, [0], [64], seed=0)
    with pytest.raises(trifree.TriFreeError):
        trifree.graph_view(params64, [3], [3], seed=0)


def test_graph_view_detects_triangle(params64):
    view = trifree.graph_view(params64, [0, 1, 0], [1, 2, 2], seed=0)
    assert not view.t_is_triangle_free()


def test_gamma_concentration():
    """|Gamma| is binomial by construction; sanity-check the first step count
    lies within 5 standard deviations for 99/100 runs."""
    params = trifree.TriFreeParams.from_n(1024)
    n_open = params.n * (params.n - 1) // 2
    mean = params.p * n_open
    sd = math.sqrt(n_open * params.p * (1 - params.p))
    good = 0
    for seed in range(100):
        state = trifree.TriFreeState(params, seed=seed)
        rec = state.step()
        if abs(rec["sampled"] - mean) <= 5 * sd:
            good += 1
    assert good >= 99
