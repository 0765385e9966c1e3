"""Random greedy r-AP-free process over Z/NZ.

Each step picks a uniformly random available residue, adds it to the growing
set I, and removes every residue that would now complete an r-AP together
with I.  For r=3 the per-step bookkeeping runs off the closed-form 3-AP
completions; general r falls back to scanning the APs through the chosen
residue, which is fine at test scale.

log means natural log throughout; m and k are rounded to nearest integer.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import dem
from .zring import RingError, three_ap_completions

DESK_XI = 0.2
DESK_DELTA = 0.1
# Theorem-style constant for k_N in the witness pipeline (see vdw module);
# desk-scale default chosen so the N ~ 1e4 pipeline succeeds with margin.
DESK_CK = 7.0


class ProcessTerminated(RuntimeError):
    """Raised by step() when no residue is available."""


@dataclass(frozen=True)
class APParams:
    xi: float
    delta: float
    m: int
    k: int
    M: float
    C_k: float = DESK_CK

    @classmethod
    def from_context(cls, ctx, xi=DESK_XI, delta=DESK_DELTA, C_k=DESK_CK,
                     paper_faithful=False):
        r = ctx.r
        if paper_faithful:
            delta = 1.0 / (40 * r * r)
            xi = delta / 500.0
        if not 0 < delta <= 1.0 / (2 * r):
            raise ValueError(f"need 0 < delta <= 1/(2r), got {delta}")
        if not 0 < xi < 1:
            raise ValueError(f"need 0 < xi < 1, got {xi}")
        D = ctx.ap_degree
        logN = math.log(ctx.N)
        root = 1.0 / (r - 1)
        M = ctx.N * D ** (-root)
        m = round(xi * M * logN ** root)
        k = round(9.0 / xi * (D / logN) ** root * logN)
        return cls(xi=xi, delta=delta, m=m, k=k, M=M, C_k=C_k)

    def k_eff(self, ctx):
        """Tracked/sampled AP length, capped at N: at desk scale the nominal
        k can exceed N, in which case a k-AP degenerates to the full ring."""
        return min(self.k, ctx.N)

    @property
    def t_m(self):
        return self.m / self.M


class APProcessState:
    """Mutable state of one seeded run.

    avail is the availability flag vector V(i); n_tilde (r=3 only) counts,
    for each available u, the qualifying (w, y) structures with w available
    and y in I -- a multiset upper bound on the exact |N_u(i)|.
    """

    def __init__(self, ctx, params, seed):
        self.ctx = ctx
        self.params = params
        self.seed = int(seed)
        ss = np.random.SeedSequence(self.seed)
        run_ss, mon_ss = ss.spawn(2)
        self.rng = np.random.default_rng(run_ss)
        self.monitor_rng = np.random.default_rng(mon_ss)
        self.i = 0
        self.I = []
        self._iset = set()
        self.avail = np.ones(ctx.N, dtype=bool)
        self.avail_count = ctx.N
        self.n_tilde = np.zeros(ctx.N, dtype=np.int64) if ctx.r == 3 else None

    @property
    def t(self):
        return self.i / self.params.M

    # -- queries ----------------------------------------------------------

    def sample_available(self, count):
        if count <= 0 or self.avail_count == 0:
            return []
        V = np.flatnonzero(self.avail)
        if count >= len(V):
            return [int(v) for v in V]
        picks = self.monitor_rng.choice(len(V), size=count, replace=False)
        return [int(V[j]) for j in np.sort(picks)]

    def available_iter(self):
        return (int(v) for v in np.flatnonzero(self.avail))

    def count_available_in(self, K):
        return int(self.avail[np.asarray(K, dtype=np.intp)].sum())

    def available_members(self, K):
        K = np.asarray(K, dtype=np.intp)
        return K[self.avail[K]]

    def exact_unavailable_set(self, v):
        """Exact N_v(i): available u != v that would become unavailable if v
        were chosen (i.e. {v, u} extends to an r-AP whose rest lies in I)."""
        if not self.avail[v]:
            raise RingError(f"residue {v} is not available")
        if self.ctx.r == 3:
            return self._nv_completions(v)
        return self._nv_general(v)

    def _nv_completions(self, v):
        N = self.ctx.N
        if not self.I:
            return set()
        Ia = np.asarray(self.I)
        cands = np.concatenate([
            (2 * Ia - v) % N,
            (2 * v - Ia) % N,
            ((v + Ia) * self.ctx.inv2) % N,
        ])
        cands = cands[self.avail[cands]]
        out = set(int(u) for u in cands)
        out.discard(v)
        return out

    def _nv_general(self, v):
        N, r = self.ctx.N, self.ctx.r
        out = set()
        for d in range(1, N):
            for j in range(r):
                a = (v - j * d) % N
                elems = [(a + i * d) % N for i in range(r)]
                others = [e for e in elems if e != v]
                if len(others) != r - 1:
                    continue
                not_in_i = [e for e in others if e not in self._iset]
                if len(not_in_i) == 1 and self.avail[not_in_i[0]]:
                    out.add(not_in_i[0])
        out.discard(v)
        return out

    # -- transitions ------------------------------------------------------

    def step(self):
        """One process step; returns {"chosen": x, "removed": set}."""
        if self.avail_count == 0:
            raise ProcessTerminated(f"no available residue at step {self.i}")
        V = np.flatnonzero(self.avail)
        x = int(V[self.rng.integers(len(V))])
        removed = self.exact_unavailable_set(x)
        if self.n_tilde is not None:
            self._update_n_tilde(x, removed)
        self.avail[x] = False
        for u in removed:
            self.avail[u] = False
        self.avail_count -= 1 + len(removed)
        self.I.append(x)
        self._iset.add(x)
        self.i += 1
        return {"chosen": x, "removed": removed}

    def _update_n_tilde(self, x, removed):
        N = self.ctx.N
        nt = self.n_tilde
        # Structures destroyed: (u, w, y) with w in {x} ∪ removed, y in I(i).
        if self.I:
            W = np.fromiter(removed, dtype=np.int64, count=len(removed))
            W = np.concatenate([W, [x]])
            Y = np.asarray(self.I, dtype=np.int64)
            ww = W[:, None]
            yy = Y[None, :]
            cands = np.concatenate([
                ((2 * yy - ww) % N).ravel(),
                ((2 * ww - yy) % N).ravel(),
                (((ww + yy) * self.ctx.inv2) % N).ravel(),
            ])
            cands = cands[self.avail[cands]]
            if len(cands):
                nt -= np.bincount(cands, minlength=N)
        # Structures created: pairs (a, b) from the 3-APs through x, both
        # still available after this step.
        ds = np.arange(1, (N - 1) // 2 + 1, dtype=np.int64)
        fams = [((x + ds) % N, (x + 2 * ds) % N),
                ((x - ds) % N, (x + ds) % N),
                ((x - 2 * ds) % N, (x - ds) % N)]
        removed_mask = np.zeros(N, dtype=bool)
        removed_mask[x] = True
        for u in removed:
            removed_mask[u] = True
        new_avail = self.avail & ~removed_mask
        add = []
        for a, b in fams:
            ok = new_avail[a] & new_avail[b]
            add.append(a[ok])
            add.append(b[ok])
        add = np.concatenate(add)
        if len(add):
            nt += np.bincount(add, minlength=N)
        nt[removed_mask] = 0


def new_process(ctx, params, seed):
    return APProcessState(ctx, params, seed)


def unavailable_neighbors(state, v):
    return state.exact_unavailable_set(v)


@dataclass
class RunResult:
    I: list
    trajectory: list
    terminated_early: bool
    tracked_aps: list = field(default_factory=list)
    final_avail_count: int = 0


def sample_tracked_aps(ctx, params, rng, count):
    """count random k_eff-APs as element arrays (k capped at N)."""
    k = params.k_eff(ctx)
    out = []
    for _ in range(count):
        a = int(rng.integers(ctx.N))
        d = int(rng.integers(1, ctx.N))
        K = (a + d * np.arange(k, dtype=np.int64)) % ctx.N
        out.append(np.unique(K))
    return out


def run(state, monitors=None, tracked=None):
    """Execute up to m steps, recording checkpoints at the configured
    interval (always including step 0).  Early termination is recorded, not
    raised."""
    if state.i != 0:
        raise ValueError("run() wants a fresh state")
    params = state.params
    trajectory = []
    if monitors is not None and tracked is None:
        tracked = sample_tracked_aps(state.ctx, params, state.monitor_rng,
                                     monitors.tracked_k_count)
    tracked = tracked or []
    if monitors is not None:
        trajectory.append(dem.record_checkpoint(state, tracked, monitors))
    terminated_early = False
    for j in range(params.m):
        try:
            state.step()
        except ProcessTerminated:
            terminated_early = True
            break
        if monitors is not None and state.i % monitors.checkpoint_every == 0:
            trajectory.append(dem.record_checkpoint(state, tracked, monitors))
    return RunResult(I=list(state.I), trajectory=trajectory,
                     terminated_early=terminated_early, tracked_aps=tracked,
                     final_avail_count=state.avail_count)


# -- freeness and hitting --------------------------------------------------

def is_ap_free(ctx, S):
    """No r-subset of S forms an r-AP.

    r=3: pairwise completion lookup, O(|S|^2).  General r: scan the APs
    through each element of S."""
    S = sorted(set(int(x) % ctx.N for x in S))
    sset = set(S)
    if ctx.r == 3:
        for idx, x in enumerate(S):
            for y in S[idx + 1:]:
                if three_ap_completions(ctx, x, y) & sset:
                    return False
        return True
    N, r = ctx.N, ctx.r
    for x in S:
        for d in range(1, N):
            for j in range(r):
                a = (x - j * d) % N
                if all((a + i * d) % N in sset for i in range(r)):
                    return False
    return True


def enumerate_ap_family(ctx, k):
    """All k-APs as (a, d) pairs, one representative per set."""
    N = ctx.N
    return [(a, d) for d in range(1, (N - 1) // 2 + 1) for a in range(N)]


def sample_ap_family(ctx, k, count, rng):
    return [(int(rng.integers(ctx.N)), int(rng.integers(1, ctx.N)))
            for _ in range(count)]


def hitting_report(ctx, I, family, k=None, missed_cap=64):
    """Which members of the family the set I misses.

    family entries are either explicit element collections, or (a, d) pairs
    denoting the k-AP {a + j*d : j < k} (k then required).  AP members are
    scanned in chunks with early exit, so dense sets short-circuit fast.
    """
    N = ctx.N
    mask = np.zeros(N, dtype=bool)
    for x in I:
        mask[x % N] = True
    total = 0
    missed = []
    n_missed = 0
    for member in family:
        total += 1
        if isinstance(member, tuple) and len(member) == 2 and k is not None:
            a, d = member
            hit = _hits_ap(mask, N, a, d, k)
        else:
            elems = np.asarray(sorted(set(int(x) % N for x in member)))
            hit = bool(mask[elems].any())
        if not hit:
            n_missed += 1
            if len(missed) < missed_cap:
                missed.append(member)
    frac = 1.0 if total == 0 else 1.0 - n_missed / total
    return {"missed": missed, "missed_count": n_missed, "family_size": total,
            "hit_fraction": frac}


def _hits_ap(mask, N, a, d, k, chunk=512):
    for lo in range(0, k, chunk):
        js = np.arange(lo, min(lo + chunk, k), dtype=np.int64)
        if mask[(a + d * js) % N].any():
            return True
    return False
