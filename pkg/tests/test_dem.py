"""Tests for the trajectory functions and runtime monitors."""

import json
import math

import numpy as np
import pytest

from greedyproc import apfree, dem, zring


@pytest.fixture(scope="module")
def ctx():
    return zring.make_context(1009, 3)


def test_q_examples():
    assert dem.q_t(3, 0.0) == 1.0
    assert dem.q_t(3, 1.0) == pytest.approx(math.exp(-1), rel=1e-12)
    ts = np.linspace(0.01, 2.0, 50)
    vals = [dem.q_t(3, t) for t in ts]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_s2_zero_at_origin(ctx):
    assert dem.s2_t(ctx, 0.0) == 0.0


def test_s2_is_minus_scaled_qprime(ctx):
    """s2(t) = -D^{1/(r-1)} q'(t), checked by central differences at 32 grid
    points, relative tolerance 1e-6."""
    D = ctx.ap_degree
    h = 1e-5
    for t in np.linspace(0.05, 1.6, 32):
        fd = -math.sqrt(D) * (dem.q_t(3, t + h) - dem.q_t(3, t - h)) / (2 * h)
        assert dem.s2_t(ctx, t) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_s2_independent_evaluation(ctx):
    t = 1.0
    direct = 2 * ctx.ap_degree ** 0.5 * t * math.exp(-t * t)
    assert dem.s2_t(ctx, t) == pytest.approx(direct, rel=1e-12)


def test_err_envelope(ctx):
    D = ctx.ap_degree
    assert dem.err_t(ctx, 0.1, 0.0) == pytest.approx(D ** -0.1, rel=1e-12)
    ts = np.linspace(0, 2, 20)
    vals = [dem.err_t(ctx, 0.1, t) for t in ts]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v >= D ** -0.1 for v in vals)


def test_monitor_config_validation():
    with pytest.raises(ValueError):
        dem.MonitorConfig(checkpoint_every=0)
    with pytest.raises(ValueError):
        dem.MonitorConfig(sampled_v_count=-1)


@pytest.fixture(scope="module")
def fresh_state(ctx):
    params = apfree.APParams.from_context(ctx)
    return apfree.new_process(ctx, params, seed=0)


def test_checkpoint_initial_identities(ctx, fresh_state):
    cfg = dem.MonitorConfig(tracked_k_count=4, sampled_v_count=8)
    tracked = apfree.sample_tracked_aps(ctx, fresh_state.params,
                                        np.random.default_rng(1), 4)
    rec = dem.record_checkpoint(fresh_state, tracked, cfg)
    D = ctx.ap_degree
    assert rec.i == 0 and rec.t == 0.0
    assert rec.avail_count == ctx.N
    assert rec.predicted_avail == ctx.N
    assert rec.s_avail_ok and rec.s_nv_ok
    for K, tr in zip(tracked, rec.tracked):
        assert tr.qk == len(K)
        # X^sigma(0) = -k * D^(-delta) < 0
        assert tr.x_plus == pytest.approx(-len(K) * D ** -0.1, rel=1e-12)
        assert tr.x_minus == pytest.approx(-len(K) * D ** -0.1, rel=1e-12)
        assert tr.k_band_ok


def test_expected_change_audit_initial(ctx, fresh_state):
    K = np.arange(200)
    audit = dem.expected_change_audit(fresh_state, K)
    # every N_v(0) is empty, so the empirical drift is exactly -|K|/N
    assert audit["empirical"] == pytest.approx(-len(K) / ctx.N, rel=1e-12)
    assert audit["empirical"] <= 0
    assert audit["predicted"] == pytest.approx(0.0)


def test_expected_change_audit_sign_midrun(ctx):
    params = apfree.APParams.from_context(ctx)
    state = apfree.new_process(ctx, params, seed=2)
    for _ in range(params.m // 2):
        state.step()
    K = np.arange(500)
    audit = dem.expected_change_audit(state, K)
    assert audit["empirical"] <= 0
    assert audit["predicted"] <= 0


def test_band_flags_replayable_from_serialization(ctx):
    params = apfree.APParams.from_context(ctx)
    state = apfree.new_process(ctx, params, seed=7)
    cfg = dem.MonitorConfig(tracked_k_count=4, sampled_v_count=8)
    res = apfree.run(state, monitors=cfg)
    for rec in res.trajectory:
        obj = json.loads(json.dumps(rec.to_dict()))
        # flags are pure functions of the recorded numbers
        assert obj["bandFlags"]["kBandViolations"] == sum(
            1 for tr in obj["trackedQK"] if not tr["kBandOk"])
        assert obj["bandFlags"]["sBandOk"] == (obj["sAvailOk"]
                                              and obj["sNvOk"])
        for tr in obj["trackedQK"]:
            # K-band holds exactly when both supermartingale shadows are
            # non-positive
            assert tr["kBandOk"] == (tr["xPlus"] <= 0 and tr["xMinus"] <= 0)


def test_x_sigma_recomputation_bit_for_bit(ctx):
    params = apfree.APParams.from_context(ctx)
    state = apfree.new_process(ctx, params, seed=3)
    cfg = dem.MonitorConfig(tracked_k_count=8, sampled_v_count=4)
    res = apfree.run(state, monitors=cfg)
    for rec in res.trajectory:
        q = dem.q_t(3, rec.t)
        e = dem.err_t(ctx, cfg.delta, rec.t)
        for tr in rec.tracked:
            k = tr.predicted / q if q else 0
            assert tr.x_plus == (tr.qk - tr.predicted) - tr.predicted * e
            assert tr.x_minus == (tr.predicted - tr.qk) - tr.predicted * e
