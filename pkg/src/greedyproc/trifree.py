"""Semi-random triangle-free process.

Each step samples a p-fraction of the open pairs, greedily keeps a
triangle-free subset, closes the open pairs that now sit on an E-triangle,
and applies a calibrated extra removal so that |O_i| tracks q_i * |O_0|.
The deterministic sequences pi_i, q_i come from the closure-rate heuristic
recursion (see pi_q_sequences); the run stops once pi_i reaches rho*sqrt(n).

Edge sets are packed adjacency bitsets; the open set additionally keeps a
flat (u, v) list with lazy compaction so batch sampling stays O(|Gamma|).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

MAX_N = 1 << 16


class TriFreeError(ValueError):
    pass


@dataclass(frozen=True)
class TriFreeParams:
    n: int
    beta: float
    sigma: float
    p: float
    rho: float
    steps: int
    paper_steps: int
    delta: float
    s: int
    s_eff: int

    @classmethod
    def from_n(cls, n, beta=0.05, delta=0.1):
        if not 0 < beta < 1.0 / 14:
            raise TriFreeError(f"need 0 < beta < 1/14, got {beta}")
        if n < 16 or n > MAX_N:
            raise TriFreeError(f"need 16 <= n <= {MAX_N}, got {n}")
        logn = math.log(n)
        sigma = logn ** -2
        p = sigma / math.sqrt(n)
        if not p < 1:
            raise TriFreeError("p >= 1")
        rho = math.sqrt(beta * logn / n)
        steps = _stop_index(sigma, p, rho * math.sqrt(n))
        paper_steps = math.ceil(n ** beta)
        s = math.ceil((108.0 / delta ** 2) * logn / rho)
        # The asymptotic s exceeds n at desk scale; the sampled event checks
        # use block size s_eff and the matching bound, both reported.
        s_eff = min(s, n // 4)
        return cls(n=n, beta=beta, sigma=sigma, p=p, rho=rho, steps=steps,
                   paper_steps=paper_steps, delta=delta, s=s, s_eff=s_eff)


def _stop_index(sigma, p, target, max_iter=10 ** 6):
    pi, q = sigma, 1.0
    for i in range(max_iter):
        if pi >= target:
            return i
        q_next = q * (1.0 - p) * math.exp(-2.0 * sigma * pi * q)
        pi, q = pi + sigma * q, q_next
    raise TriFreeError("pi recursion did not reach its target")


def pi_q_sequences(params):
    """pi_0 = sigma, pi_{i+1} = pi_i + sigma*q_i;
    q_0 = 1, q_{i+1} = q_i*(1-p)*exp(-2*sigma*pi_i*q_i).

    Returns arrays of length steps+1; asserts 0 < q <= 1 and pi strictly
    increasing (both finite)."""
    I = params.steps
    pi = np.empty(I + 1)
    q = np.empty(I + 1)
    pi[0], q[0] = params.sigma, 1.0
    for i in range(I):
        q[i + 1] = q[i] * (1.0 - params.p) * math.exp(
            -2.0 * params.sigma * pi[i] * q[i])
        pi[i + 1] = pi[i] + params.sigma * q[i]
    if not (np.all(q > 0) and np.all(q <= 1.0)):
        raise TriFreeError("q sequence left (0, 1]")
    if not (np.all(np.diff(pi) > 0) and np.all(np.isfinite(pi))):
        raise TriFreeError("pi sequence not strictly increasing")
    return pi, q


def _pack_mask(members, n, words):
    bits = np.zeros(words * 64, dtype=np.uint8)
    bits[np.asarray(members, dtype=np.intp)] = 1
    return np.packbits(bits, bitorder="little").view(np.uint64)


class TriFreeState:
    def __init__(self, params, seed):
        n = params.n
        self.params = params
        self.seed = int(seed)
        ss = np.random.SeedSequence(self.seed)
        run_ss, mon_ss = ss.spawn(2)
        self.rng = np.random.default_rng(run_ss)
        self.monitor_rng = np.random.default_rng(mon_ss)
        self.i = 0
        self.words = (n + 63) // 64
        self.ebits = np.zeros((n, self.words), dtype=np.uint64)
        self.tbits = np.zeros((n, self.words), dtype=np.uint64)
        self.obits = np.empty((n, self.words), dtype=np.uint64)
        self.obits.fill(np.uint64(0xFFFFFFFFFFFFFFFF))
        for v in range(n):
            self._clear_obit(v, v)
        pad = self.words * 64 - n
        if pad:
            keep = np.uint64((1 << (64 - pad)) - 1)
            self.obits[:, -1] &= keep
        self.open_u = np.repeat(np.arange(n - 1, dtype=np.int32),
                                np.arange(n - 1, 0, -1))
        self.open_v = _upper_cols(n)
        self.o_count = n * (n - 1) // 2
        self.t_us = []
        self.t_vs = []
        self.pi_seq, self.q_seq = pi_q_sequences(params)

    def _clear_obit(self, u, v):
        self.obits[u, v >> 6] &= ~(np.uint64(1) << np.uint64(v & 63))

    def _alive(self, us, vs):
        w = (self.obits[us, vs >> 6] >> (vs & 63).astype(np.uint64)) \
            & np.uint64(1)
        return w.astype(bool)

    def _compact(self):
        keep = self._alive(self.open_u, self.open_v.astype(np.int64))
        self.open_u = self.open_u[keep]
        self.open_v = self.open_v[keep]

    def _sample_open_positions(self, count):
        """count distinct alive list positions, by rejection against the open
        bitset (the list may hold up to 50% dead entries between compactions)."""
        if count <= 0:
            return np.empty(0, dtype=np.int64)
        chosen = []
        seen = set()
        need = count
        L = len(self.open_u)
        while need > 0:
            cand = self.rng.integers(L, size=max(64, int(need * 1.4)))
            us = self.open_u[cand].astype(np.int64)
            vs = self.open_v[cand].astype(np.int64)
            ok = self._alive(us, vs)
            for pos in cand[ok]:
                pos = int(pos)
                if pos not in seen:
                    seen.add(pos)
                    chosen.append(pos)
                    need -= 1
                    if need == 0:
                        break
        out = np.array(chosen[:count], dtype=np.int64)
        out.sort()
        return out

    def _remove_open(self, us, vs):
        for a, b in ((us, vs), (vs, us)):
            np.bitwise_and.at(
                self.obits, (a, b >> 6),
                ~(np.uint64(1) << (b & 63).astype(np.uint64)))

    # ------------------------------------------------------------------

    def step(self):
        """One iteration; returns the StepReport counters."""
        params = self.params
        if self.i >= params.steps:
            raise TriFreeError(f"run already completed {params.steps} steps")
        i = self.i
        q_i, q_next = self.q_seq[i], self.q_seq[i + 1]
        o_before = self.o_count

        # (1) Gamma: binomial count, then distinct alive positions -- same
        # distribution as per-edge Bernoulli(p).
        n_gamma = int(self.rng.binomial(o_before, params.p))
        pos = self._sample_open_positions(n_gamma)
        g_us = self.open_u[pos].astype(np.int64)
        g_vs = self.open_v[pos].astype(np.int64)

        # (2) E <- E ∪ Gamma; Gamma leaves O.
        self._remove_open(g_us, g_vs)
        for a, b in ((g_us, g_vs), (g_vs, g_us)):
            np.bitwise_or.at(
                self.ebits, (a, b >> 6),
                np.uint64(1) << (b & 63).astype(np.uint64))

        # (3) greedy deletion in PRNG-shuffled order.
        perm = self.rng.permutation(n_gamma)
        su, sv = g_us[perm], g_vs[perm]
        accepted = kernels.accept_batch(self.tbits, su, sv).astype(bool)
        self.t_us.append(su[accepted])
        self.t_vs.append(sv[accepted])
        n_deleted = n_gamma - int(accepted.sum())

        # (4) C': open pairs now sitting on a triangle of the new E.
        closed = kernels.mark_closed(self.obits, self.ebits, g_us, g_vs)
        n_closed = len(closed)

        # (5) calibrated extra removal among the survivors.
        o_surviving = o_before - n_gamma - n_closed
        s_i = 0.0
        n_extra = 0
        if o_surviving > 0:
            s_i = max(0.0, 1.0 - q_next * o_before / (q_i * o_surviving))
            n_extra = int(self.rng.binomial(o_surviving, s_i))
            if n_extra:
                pos = self._sample_open_positions(n_extra)
                r_us = self.open_u[pos].astype(np.int64)
                r_vs = self.open_v[pos].astype(np.int64)
                self._remove_open(r_us, r_vs)

        self.o_count = o_surviving - n_extra
        if self.o_count < len(self.open_u) // 2:
            self._compact()
        self.i += 1

        gamma_deg = np.bincount(np.concatenate([g_us, g_vs]),
                                minlength=params.n) if n_gamma else \
            np.zeros(1, dtype=np.int64)
        max_deg = int(gamma_deg.max())
        n_le_bound = 2.0 * params.sigma * q_i * math.sqrt(params.n)
        return {
            "i": self.i,
            "sampled": n_gamma,
            "deleted": n_deleted,
            "closed": n_closed,
            "extraRemoved": n_extra,
            "oCount": self.o_count,
            "tCount": self.t_edge_count(),
            "q": float(q_i),
            "pi": float(self.pi_seq[i]),
            "sI": s_i,
            "maxGammaDeg": max_deg,
            "nLeBound": n_le_bound,
            "nLeOk": max_deg <= n_le_bound,
        }

    def t_edge_count(self):
        return sum(len(a) for a in self.t_us)

    def t_edges(self):
        """Sorted canonical (u, v) arrays, u < v."""
        us = np.concatenate(self.t_us) if self.t_us else np.empty(0, np.int64)
        vs = np.concatenate(self.t_vs) if self.t_vs else np.empty(0, np.int64)
        a, b = np.minimum(us, vs), np.maximum(us, vs)
        order = np.lexsort((b, a))
        return a[order], b[order]

    def t_is_triangle_free(self):
        us, vs = self.t_edges()
        return kernels.first_triangle(self.tbits, us, vs) == -1

    def max_degree(self):
        us, vs = self.t_edges()
        if len(us) == 0:
            return 0
        return int(np.bincount(np.concatenate([us, vs]),
                               minlength=self.params.n).max())


def _upper_cols(n):
    cols = np.empty(n * (n - 1) // 2, dtype=np.int32)
    pos = 0
    for u in range(n - 1):
        cols[pos:pos + n - 1 - u] = np.arange(u + 1, n, dtype=np.int32)
        pos += n - 1 - u
    return cols


@dataclass
class EventReport:
    tstar_samples: int = 0
    tstar_violations: int = 0
    tplus_samples: int = 0
    tplus_violations: int = 0
    tstar_min_margin: float = math.inf
    tplus_min_margin: float = math.inf
    consistency_checked: int = 0
    consistency_ok: bool = True

    def to_dict(self):
        return {
            "tStar": {"samples": self.tstar_samples,
                      "violations": self.tstar_violations,
                      "minMargin": self.tstar_min_margin},
            "tPlus": {"samples": self.tplus_samples,
                      "violations": self.tplus_violations,
                      "minMargin": self.tplus_min_margin},
            "consistency": {"checked": self.consistency_checked,
                            "ok": self.consistency_ok},
        }


def _count_edge_scan(t_us, t_vs, in_a, in_b):
    return int((in_a[t_us] & in_b[t_vs]).sum()
               + (in_b[t_us] & in_a[t_vs]).sum())


def event_checks(state, tstar_samples=1000, tplus_samples=1000,
                 consistency_samples=16, rng=None):
    """Sampled verification of the pseudo-random events on H = ([n], T_I).

    T*: disjoint |A| = |B| = s_eff blocks must carry at least
    (1-delta)|A||B|rho T-edges.  T+: disjoint blocks of equal size up to
    2*s_eff must carry at most (1+delta)*2*s_eff*|B|*rho.  The first few
    samples are recounted by a direct edge scan as a consistency check.
    """
    params = state.params
    n, words = params.n, state.words
    s = params.s_eff
    rho, delta = params.rho, params.delta
    if rng is None:
        rng = state.monitor_rng
    t_us, t_vs = state.t_edges()
    report = EventReport()

    def count(A, B):
        colmask = _pack_mask(B, n, words)
        return kernels.count_between(state.tbits, A.astype(np.intp), colmask)

    checked = 0
    for _ in range(tstar_samples):
        perm = rng.permutation(n)
        A, B = perm[:s], perm[s:2 * s]
        c = count(A, B)
        margin = c - (1.0 - delta) * s * s * rho
        report.tstar_min_margin = min(report.tstar_min_margin, margin)
        report.tstar_samples += 1
        if margin < 0:
            report.tstar_violations += 1
        if checked < consistency_samples:
            checked += 1
            in_a = np.zeros(n, dtype=bool)
            in_b = np.zeros(n, dtype=bool)
            in_a[A] = True
            in_b[B] = True
            if _count_edge_scan(t_us, t_vs, in_a, in_b) != c:
                report.consistency_ok = False
    for _ in range(tplus_samples):
        size = int(rng.integers(1, 2 * s + 1))
        perm = rng.permutation(n)
        A, B = perm[:size], perm[size:2 * size]
        c = count(A, B)
        margin = (1.0 + delta) * 2 * s * size * rho - c
        report.tplus_min_margin = min(report.tplus_min_margin, margin)
        report.tplus_samples += 1
        if margin < 0:
            report.tplus_violations += 1
        if checked < consistency_samples:
            checked += 1
            in_a = np.zeros(n, dtype=bool)
            in_b = np.zeros(n, dtype=bool)
            in_a[A] = True
            in_b[B] = True
            if _count_edge_scan(t_us, t_vs, in_a, in_b) != c:
                report.consistency_ok = False
    report.consistency_checked = checked
    return report


class GraphView:
    """Read-only stand-in for a completed state, rebuilt from a stored edge
    list; enough surface for event_checks and the triangle scan."""

    def __init__(self, params, us, vs, seed=0):
        n = params.n
        self.params = params
        self.words = (n + 63) // 64
        self.monitor_rng = np.random.default_rng(
            np.random.SeedSequence(int(seed)))
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if len(us) and (us.min() < 0 or max(us.max(), vs.max()) >= n
                        or (us == vs).any()):
            raise TriFreeError("edge endpoints out of range or loops")
        self.tbits = np.zeros((n, self.words), dtype=np.uint64)
        for a, b in ((us, vs), (vs, us)):
            np.bitwise_or.at(self.tbits, (a, b >> 6),
                             np.uint64(1) << (b & 63).astype(np.uint64))
        self._us, self._vs = np.minimum(us, vs), np.maximum(us, vs)

    def t_edges(self):
        order = np.lexsort((self._vs, self._us))
        return self._us[order], self._vs[order]

    def t_is_triangle_free(self):
        us, vs = self.t_edges()
        return kernels.first_triangle(self.tbits, us, vs) == -1


def graph_view(params, us, vs, seed=0):
    return GraphView(params, us, vs, seed)


@dataclass
class RunReport:
    params: TriFreeParams
    seed: int
    edges: tuple
    trajectory: list = field(default_factory=list)
    n_le_all_ok: bool = True
    triangle_free: bool = True
    event_report: EventReport = None
    metadata: dict = field(default_factory=dict)


def run(params, seed, tstar_samples=0, tplus_samples=0,
        per_step_triangle_check=None):
    """Execute all steps; returns the final graph, the per-step trajectory,
    the exact N_{<=I} outcomes, and (when sample counts are positive) the
    sampled event report.  State is returned in metadata for further checks."""
    state = TriFreeState(params, seed)
    if per_step_triangle_check is None:
        per_step_triangle_check = params.n <= 512
    trajectory = []
    n_le_all_ok = True
    for _ in range(params.steps):
        rec = state.step()
        if per_step_triangle_check:
            rec["triangleFreeExact"] = state.t_is_triangle_free()
            if not rec["triangleFreeExact"]:
                raise TriFreeError(f"T not triangle-free after step {state.i}")
        n_le_all_ok &= bool(rec["nLeOk"])
        trajectory.append(rec)
    event_report = None
    if tstar_samples or tplus_samples:
        event_report = event_checks(state, tstar_samples=tstar_samples,
                                    tplus_samples=tplus_samples)
    report = RunReport(
        params=params, seed=int(seed), edges=state.t_edges(),
        trajectory=trajectory, n_le_all_ok=n_le_all_ok,
        triangle_free=state.t_is_triangle_free(), event_report=event_report,
        metadata={
            "state": state,
            "maxDegree": state.max_degree(),
            "edgeCount": state.t_edge_count(),
            # the deletion rule and q-recursion are reconstructions of the
            # companion definitions; trajectory agreement is empirical
            "reconstructedRecursion": True,
            "paperSteps": params.paper_steps,
            "piOverSqrtN": float(state.pi_seq[-1] / math.sqrt(params.n)),
        })
    return report
