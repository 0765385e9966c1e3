"""Arithmetic progressions as sets in Z/NZ for prime N.

Residues are plain ints in [0, N); every operation reduces mod N explicitly.
An r-AP is the *set* {a, a+d, ..., a+(r-1)d} for some d != 0; the (a, d)
representation is never part of the public contract because distinct (a, d)
pairs describe the same set.
"""
from dataclasses import dataclass
from functools import lru_cache

import sympy

# Enumeration threshold: below this the AP family is counted by brute force,
# above it by the (a, d)-pair count divided by the measured per-set
# representation multiplicity.
ENUM_LIMIT = 1000


class RingError(ValueError):
    pass


@dataclass(frozen=True)
class RingContext:
    """Immutable description of the r-AP structure of Z/NZ.

    total_aps is |A_{N,r}| (APs counted as sets); ap_degree is the number of
    r-APs through any fixed residue, which is the same for every residue.
    """
    N: int
    r: int
    total_aps: int
    ap_degree: int

    @property
    def inv2(self):
        return (self.N + 1) // 2


def make_context(N, r):
    if not sympy.isprime(N):
        raise RingError(f"N={N} is not prime")
    if N < 5:
        raise RingError(f"N={N} too small (need N >= 5)")
    if not 3 <= r < N:
        raise RingError(f"need 3 <= r < N, got r={r}, N={N}")
    if N <= ENUM_LIMIT:
        total = len(enumerate_aps(N, r))
    else:
        reps = _representation_multiplicity(r)
        pairs = N * (N - 1)
        if pairs % reps != 0:
            total = len(enumerate_aps(N, r))
        else:
            total = pairs // reps
    if (r * total) % N != 0:
        raise RingError(
            f"AP count {total} inconsistent: {r}*{total} not divisible by N={N}")
    return RingContext(N=N, r=r, total_aps=total, ap_degree=r * total // N)


def enumerate_aps(N, r):
    """All r-APs of Z/NZ as a set of sorted tuples (brute force with dedup)."""
    seen = set()
    for d in range(1, N):
        for a in range(N):
            seen.add(tuple(sorted((a + j * d) % N for j in range(r))))
    return seen


@lru_cache(maxsize=None)
def _representation_multiplicity(r):
    """Measured number of (a, d) pairs per r-AP set, asserted constant across
    sets on a reference prime; make_context falls back to enumeration if the
    measurement does not divide N(N-1) evenly."""
    probe = 31 if r < 31 else sympy.nextprime(2 * r)
    counts = {}
    for d in range(1, probe):
        for a in range(probe):
            key = tuple(sorted((a + j * d) % probe for j in range(r)))
            counts[key] = counts.get(key, 0) + 1
    values = set(counts.values())
    if len(values) != 1:
        raise RingError(
            f"per-set representation count is not constant for r={r}: {values}")
    return values.pop()


def is_ap(ctx, S, length=None):
    """Whether S is an AP of the given length (default ctx.r) in Z/NZ.

    Decided by scanning all differences d, which doubles as the oracle the
    closed-form helpers are tested against.
    """
    k = ctx.r if length is None else length
    S = set(x % ctx.N for x in S)
    if len(S) != k or k < 2:
        return False
    N = ctx.N
    for d in range(1, N):
        for a in S:
            if all((a + j * d) % N in S for j in range(1, k)):
                return True
    return False


def aps_through(ctx, x):
    """The ap_degree distinct r-APs containing x, as sorted tuples in
    lexicographic order."""
    N, r = ctx.N, ctx.r
    x %= N
    seen = set()
    for d in range(1, N):
        for j in range(r):
            a = (x - j * d) % N
            seen.add(tuple(sorted((a + i * d) % N for i in range(r))))
    out = sorted(seen)
    if len(out) != ctx.ap_degree:
        raise RingError(
            f"enumerated {len(out)} APs through {x}, expected {ctx.ap_degree}")
    return out


def three_ap_completions(ctx, x, w):
    """The residues u with {x, w, u} a 3-AP: u is the far point past w, the
    far point past x, or the midpoint."""
    N = ctx.N
    x %= N
    w %= N
    if x == w:
        raise RingError("three_ap_completions needs two distinct residues")
    cands = {(2 * w - x) % N, (2 * x - w) % N, ((x + w) * ctx.inv2) % N}
    return cands - {x, w}


def k_ap(ctx, a, d, k):
    """The set {a + j*d : 0 <= j < k} mod N as a sorted tuple."""
    N = ctx.N
    if d % N == 0:
        raise RingError("difference d must be nonzero mod N")
    if k > N:
        raise RingError(f"k={k} exceeds N={N}")
    return tuple(sorted((a + j * d) % N for j in range(k)))
