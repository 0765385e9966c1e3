"""Trajectory functions and runtime monitors for the greedy AP-free process.

The deterministic predictions q, s2 and the error envelope live here, along
with the per-checkpoint record comparing process state against them.  Band
flags are pure functions of the recorded numbers, so a run can be re-audited
from its JSONL transcript alone.
"""
import math
from dataclasses import dataclass, field


def _ipow(t, e):
    """t**e for integer e >= 0 by repeated squaring; keeps transcript floats
    identical across platforms regardless of libm pow."""
    acc = 1.0
    base = t
    while e > 0:
        if e & 1:
            acc *= base
        base *= base
        e >>= 1
    return acc


def q_t(r, t):
    """Predicted surviving fraction exp(-t^(r-1))."""
    return math.exp(-_ipow(t, r - 1))


def qprime_t(r, t):
    return -(r - 1) * _ipow(t, r - 2) * q_t(r, t)


def s2_t(ctx, t):
    """Predicted per-element unavailability pressure:
    (r-1) * D^(1/(r-1)) * t^(r-2) * q(t)."""
    r = ctx.r
    return (r - 1) * ctx.ap_degree ** (1.0 / (r - 1)) * _ipow(t, r - 2) * q_t(r, t)


def err_t(ctx, delta, t):
    """Relative error envelope exp(5(t + t^(r-1))) * D^(-delta)."""
    r = ctx.r
    return math.exp(5.0 * (t + _ipow(t, r - 1))) * ctx.ap_degree ** (-delta)


@dataclass
class MonitorConfig:
    checkpoint_every: int = 1
    tracked_k_count: int = 32
    sampled_v_count: int = 64
    delta: float = 0.1
    xi: float = 0.2
    # Exhaustive max_v |N_v ∩ K| is O(N * |I|) per checkpoint; off by default,
    # the sampled v are used instead (reported as sampled).
    n_band_exact: bool = False

    def __post_init__(self):
        if self.checkpoint_every < 1 or self.sampled_v_count < 0:
            raise ValueError("monitor intervals/counts must be positive")


@dataclass
class TrackedKRecord:
    qk: int
    predicted: float
    x_plus: float
    x_minus: float
    k_band_ok: bool
    n_band_max: int
    n_band_ok: bool

    def to_dict(self):
        return {
            "qk": self.qk,
            "predicted": self.predicted,
            "xPlus": self.x_plus,
            "xMinus": self.x_minus,
            "kBandOk": self.k_band_ok,
            "nBandMax": self.n_band_max,
            "nBandOk": self.n_band_ok,
        }


@dataclass
class TrajectoryRecord:
    i: int
    t: float
    avail_count: int
    predicted_avail: float
    s_avail_ok: bool
    sampled_nv_deviations: list = field(default_factory=list)
    sampled_max_nv_deviation: float = 0.0
    s_nv_ok: bool = True
    tracked: list = field(default_factory=list)

    @property
    def k_band_violations(self):
        return sum(1 for rec in self.tracked if not rec.k_band_ok)

    def to_dict(self):
        return {
            "i": self.i,
            "t": self.t,
            "availCount": self.avail_count,
            "predictedAvail": self.predicted_avail,
            "sAvailOk": self.s_avail_ok,
            "sampledMaxNvDeviation": self.sampled_max_nv_deviation,
            "sNvOk": self.s_nv_ok,
            "trackedQK": [rec.to_dict() for rec in self.tracked],
            "bandFlags": {
                "kBandViolations": self.k_band_violations,
                "sBandOk": self.s_avail_ok and self.s_nv_ok,
            },
        }


def record_checkpoint(state, tracked, cfg):
    """Snapshot all monitored quantities of an AP-free process run.

    tracked is a list of integer arrays (the tracked k-APs).  Sampling of the
    available numbers uses the state's dedicated monitor RNG, so enabling or
    thinning checkpoints never perturbs the process trajectory itself.
    """
    ctx = state.ctx
    delta = cfg.delta
    t = state.t
    q = q_t(ctx.r, t)
    s2 = s2_t(ctx, t)
    e = err_t(ctx, delta, t)
    D = ctx.ap_degree
    root_d = 1.0 / (ctx.r - 1)

    avail_count = state.avail_count
    predicted_avail = ctx.N * q
    s_avail_ok = abs(avail_count - predicted_avail) <= D ** (-delta) * predicted_avail

    sampled = state.sample_available(cfg.sampled_v_count)
    devs = []
    nv_sets = []
    for v in sampled:
        nv = state.exact_unavailable_set(v)
        nv_sets.append(nv)
        devs.append(len(nv) - s2)
    max_dev = max((abs(d) for d in devs), default=0.0)
    s_nv_ok = max_dev <= D ** (root_d - delta)

    n_band_cap = D ** (root_d - 3 * delta)
    recs = []
    for K in tracked:
        k_eff = len(K)
        qk = state.count_available_in(K)
        pred = k_eff * q
        band = pred * e
        x_plus = (qk - pred) - band
        x_minus = (pred - qk) - band
        k_band_ok = abs(qk - pred) <= band
        kset = set(int(x) for x in K)
        if cfg.n_band_exact:
            pairs = ((v, state.exact_unavailable_set(v))
                     for v in state.available_iter())
        else:
            pairs = zip(sampled, nv_sets)
        n_max = 0
        for _, nv in pairs:
            inter = len(nv & kset)
            if inter > n_max:
                n_max = inter
        recs.append(TrackedKRecord(
            qk=qk, predicted=pred, x_plus=x_plus, x_minus=x_minus,
            k_band_ok=k_band_ok, n_band_max=n_max,
            n_band_ok=n_max <= n_band_cap))

    return TrajectoryRecord(
        i=state.i, t=t, avail_count=avail_count,
        predicted_avail=predicted_avail, s_avail_ok=s_avail_ok,
        sampled_nv_deviations=devs, sampled_max_nv_deviation=max_dev,
        s_nv_ok=s_nv_ok, tracked=recs)


def expected_change_audit(state, K, exact_limit=4096):
    """Empirical vs predicted expected one-step change of |V(i) ∩ K|.

    empirical = -sum_{v in V∩K} (|N_v(i)|+1) / |V(i)|, exact when the
    intersection is small, otherwise estimated from a uniform subsample and
    rescaled.  predicted is the leading drift term k*q'(t)/M.
    """
    ctx = state.ctx
    members = state.available_members(K)
    n_avail = state.avail_count
    if len(members) <= exact_limit:
        chosen = members
        scale = 1.0
    else:
        chosen = state.monitor_rng.choice(members, size=exact_limit, replace=False)
        scale = len(members) / exact_limit
    total = 0
    for v in chosen:
        total += len(state.exact_unavailable_set(int(v))) + 1
    empirical = -scale * total / n_avail
    predicted = len(K) * qprime_t(ctx.r, state.t) / state.params.M
    return {"empirical": empirical, "predicted": predicted}
