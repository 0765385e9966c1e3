"""Graph constructions and induced-bipartite-min-degree analytics.

Blow-ups, disjoint unions and min-degree pruning feed the g(n, d) witness
assembly; the exact subset oracle (n <= 20) and the randomized heuristic
bound the largest min degree over induced bipartite subgraphs.  Proof-mode
constants are recorded verbatim in witness metadata; measured mode derives
the subgraph order from the generator's actual degree statistics instead,
and is flagged as such.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

EXACT_N_LIMIT = 20

# proof constants (delta = 1/10): c = delta/4, C' = 2 + delta, C'' = 3*D_s
# with D_s = 108/delta^2, beta = 10^-2, A = c*sqrt(beta)/3
GND_DELTA = 0.1
GND_C = GND_DELTA / 4.0
GND_CPRIME = 2.0 + GND_DELTA
GND_CDOUBLE = 3.0 * (108.0 / GND_DELTA ** 2)
GND_BETA = 1e-2
GND_A = GND_C * math.sqrt(GND_BETA) / 3.0


class GraphError(ValueError):
    pass


class Graph:
    """Simple undirected graph: symmetric loop-free bool adjacency."""

    def __init__(self, adj, labels=None):
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphError("adjacency must be square")
        if adj.diagonal().any():
            raise GraphError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise GraphError("adjacency must be symmetric")
        self.adj = adj
        self.n = adj.shape[0]
        self.labels = np.arange(self.n) if labels is None else \
            np.asarray(labels)

    @classmethod
    def from_edges(cls, n, edges):
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop ({u}, {v})")
            adj[u, v] = adj[v, u] = True
        return cls(adj)

    @classmethod
    def empty(cls, n):
        return cls(np.zeros((n, n), dtype=bool))

    def degrees(self):
        return self.adj.sum(axis=1)

    def edges(self):
        us, vs = np.nonzero(np.triu(self.adj, 1))
        return list(zip(us.tolist(), vs.tolist()))

    def edge_count(self):
        return int(self.adj.sum()) // 2

    def induced(self, vertices):
        idx = np.asarray(sorted(vertices), dtype=np.intp)
        return Graph(self.adj[np.ix_(idx, idx)], labels=self.labels[idx])

    def packed(self):
        words = (self.n + 63) // 64
        padded = np.zeros((self.n, words * 64), dtype=np.uint8)
        padded[:, :self.n] = self.adj
        return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


def is_triangle_free(G):
    if G.n == 0:
        return True
    tbits = G.packed()
    us, vs = np.nonzero(np.triu(G.adj, 1))
    return kernels.first_triangle(tbits, us.astype(np.int64),
                                  vs.astype(np.int64)) == -1


def graph_stats(G):
    deg = G.degrees()
    return {
        "n": G.n,
        "minDeg": int(deg.min()) if G.n else 0,
        "maxDeg": int(deg.max()) if G.n else 0,
        "edges": G.edge_count(),
        "triangleFree": is_triangle_free(G),
    }


def prune_min_degree(G, threshold):
    """Iteratively delete vertices of degree <= threshold; the surviving
    induced subgraph has min degree > threshold or is empty.  The peeling
    fixed point is order-independent."""
    keep = np.ones(G.n, dtype=bool)
    while True:
        deg = (G.adj & keep[None, :]).sum(axis=1)
        drop = keep & (deg <= threshold)
        if not drop.any():
            break
        keep &= ~drop
    idx = np.flatnonzero(keep)
    return Graph(G.adj[np.ix_(idx, idx)], labels=G.labels[idx])


def blow_up(G, sizes):
    """Replace vertex v by an independent set of sizes[v] clones; adjacent
    classes get a complete bipartite join."""
    sizes = np.asarray(sizes, dtype=np.int64)
    if len(sizes) != G.n:
        raise GraphError(f"need {G.n} sizes, got {len(sizes)}")
    if (sizes < 1).any():
        raise GraphError("blow-up sizes must be positive")
    adj = np.repeat(np.repeat(G.adj, sizes, axis=0), sizes, axis=1)
    return Graph(adj)


def disjoint_union(G, copies):
    if copies < 1:
        raise GraphError("copies must be >= 1")
    adj = np.kron(np.eye(copies, dtype=bool), G.adj)
    return Graph(adj)


# -- induced bipartite min degree ------------------------------------------

def _is_bipartite_subset(adj_masks, subset):
    """2-color the induced subgraph by BFS over bitmask adjacency."""
    color = {}
    members = subset
    for start in _bits(members):
        if start in color:
            continue
        color[start] = 0
        queue = [start]
        while queue:
            v = queue.pop()
            nbrs = adj_masks[v] & members
            for u in _bits(nbrs):
                if u not in color:
                    color[u] = color[v] ^ 1
                    queue.append(u)
                elif color[u] == color[v]:
                    return False
    return True


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def exact_max_bipartite_min_degree(G):
    """Max of min-degree(G[S]) over nonempty S with G[S] bipartite.

    Min degrees of all subsets are computed vectorized (popcounts over
    bitmask adjacency); subsets are then visited in decreasing min-degree
    order with a BFS bipartiteness early exit.
    """
    n = G.n
    if n == 0:
        raise GraphError("graph is empty")
    if n > EXACT_N_LIMIT:
        raise GraphError(f"exact oracle limited to n <= {EXACT_N_LIMIT}")
    adj_masks = np.zeros(n, dtype=np.uint32)
    for v in range(n):
        adj_masks[v] = int(sum(1 << u for u in np.flatnonzero(G.adj[v])))
    subsets = np.arange(1, 1 << n, dtype=np.uint32)
    degs = np.bitwise_count(adj_masks[None, :] & subsets[:, None])
    member = (subsets[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) \
        & np.uint32(1)
    degs = np.where(member.astype(bool), degs, np.uint32(255))
    mindeg = degs.min(axis=1).astype(np.int64)
    order = np.argsort(-mindeg, kind="stable")
    masks_py = [int(m) for m in adj_masks]
    for j in order:
        S = int(subsets[j])
        if _is_bipartite_subset(masks_py, S):
            return {"value": int(mindeg[j]),
                    "witnessSet": set(_bits(S))}
    raise AssertionError("unreachable: singletons are bipartite")


def heuristic_bipartite_min_degree(G, tries=32, seed=0):
    """Randomized lower bound: random 2-colorings repaired into induced
    bipartite subgraphs, then min-degree peeling, keeping the best state
    seen.  Always valid (odd-cycle-free witness), never exceeds the exact
    optimum."""
    n = G.n
    if n == 0:
        raise GraphError("graph is empty")
    rng = np.random.default_rng(seed)
    best_val, best_set = 0, {0}
    for _ in range(max(1, tries)):
        color = rng.integers(2, size=n)
        alive = np.ones(n, dtype=bool)
        # repair: delete the vertex with the most same-color neighbors until
        # the same-color conflict graph is empty
        while True:
            same = G.adj & alive[None, :] & alive[:, None] \
                & (color[None, :] == color[:, None])
            conf = same.sum(axis=1)
            if conf.max(initial=0) == 0:
                break
            worst = int(np.argmax(conf))
            alive[worst] = False
        # peel: removing a min-degree vertex keeps bipartiteness; track the
        # best min degree along the way
        while alive.any():
            deg = (G.adj & alive[None, :]).sum(axis=1)
            deg = np.where(alive, deg, n + 1)
            live = np.flatnonzero(alive)
            cur = int(deg[live].min())
            if cur > best_val:
                best_val = cur
                best_set = set(int(v) for v in live)
            alive[int(live[np.argmin(deg[live])])] = False
    return {"value": best_val, "witnessSet": best_set}


# -- g(n, d) witness -------------------------------------------------------

@dataclass
class GndWitness:
    n: int
    d: int
    case: str
    mode: str
    constants: dict
    n_prime: int = 0
    graph: Graph = None
    ok: bool = False
    failing_link: str = None
    checks: dict = field(default_factory=dict)
    links: list = field(default_factory=list)

    def to_dict(self):
        return {
            "n": self.n, "d": self.d, "case": self.case, "mode": self.mode,
            "constants": self.constants, "nPrime": self.n_prime,
            "ok": self.ok, "failingLink": self.failing_link,
            "checks": self.checks, "links": self.links,
        }


def _case_for(n, d):
    return "smallD" if d <= GND_A * math.sqrt(n * math.log(n)) else "largeD"


def build_gnd_witness(n, d, genH, mode="constants", case=None):
    """Assemble a triangle-free n-vertex graph with min degree >= d.

    smallD: disjoint union of floor(n/n') copies of G_{n'}, then a blow-up
    with sizes in {1..6} to exactly n vertices.  largeD: blow-up of G_{n'}
    by floor(n/n') with size adjustment.  Each inequality link of the chain
    is evaluated in order; the first failure is reported instead of guessing
    adjusted constants.
    """
    if not math.sqrt(n) <= d <= n ** (2.0 / 3.0):
        raise GraphError(f"need sqrt(n) <= d <= n^(2/3), got n={n}, d={d}")
    if mode not in ("constants", "measured"):
        raise GraphError(f"unknown mode {mode!r}")
    if case is None:
        case = _case_for(n, d)
    logn = math.log(n)
    consts = {"delta": GND_DELTA, "c": GND_C, "Cprime": GND_CPRIME,
              "Cdouble": GND_CDOUBLE, "beta": GND_BETA, "A": GND_A}
    if case == "smallD":
        alpha = (2.0 / (GND_C ** 2 * GND_BETA)) if mode == "constants" \
            else 1.0 / ((1 - 2 * GND_DELTA) ** 2 * GND_BETA)
        n_prime = math.ceil(alpha * d * d / logn)
    else:
        alpha = (GND_C ** 2 * GND_BETA / 18.0) if mode == "constants" \
            else 0.5 * (1 - 2 * GND_DELTA) ** 2 * GND_BETA
        n_prime = math.floor(alpha * (n / d) ** 2 * logn)
    consts["alpha"] = alpha
    wit = GndWitness(n=n, d=d, case=case, mode=mode, constants=consts,
                     n_prime=n_prime)

    def link(name, ok, **vals):
        wit.links.append({"name": name, "ok": bool(ok), **vals})
        return bool(ok)

    if not link("subgraph_order_feasible", 3 <= n_prime <= n,
                nPrime=n_prime, n=n):
        wit.failing_link = "subgraph_order_feasible"
        return wit
    H = genH(n_prime)
    stats = graph_stats(H)
    delta_h = stats["minDeg"]
    if not link("generator_triangle_free", stats["triangleFree"]):
        wit.failing_link = "generator_triangle_free"
        return wit
    if not link("generator_min_degree_positive", delta_h >= 1,
                minDeg=delta_h):
        wit.failing_link = "generator_min_degree_positive"
        return wit

    if case == "smallD":
        copies = n // H.n
        if not link("union_copies_positive", copies >= 1,
                    copies=copies, subgraphOrder=H.n):
            wit.failing_link = "union_copies_positive"
            return wit
        if not link("union_min_degree_reaches_d", delta_h >= d,
                    minDeg=delta_h, d=d):
            wit.failing_link = "union_min_degree_reaches_d"
            return wit
        base = disjoint_union(H, copies)
        extra = n - base.n
        if not link("blow_up_sizes_within_six", extra <= 5 * base.n,
                    extra=extra, baseOrder=base.n):
            wit.failing_link = "blow_up_sizes_within_six"
            return wit
        sizes = np.ones(base.n, dtype=np.int64)
        pos = 0
        while extra > 0:
            if sizes[pos] < 6:
                sizes[pos] += 1
                extra -= 1
            pos = (pos + 1) % base.n
        final = blow_up(base, sizes)
    else:
        b = n // H.n
        if mode == "measured":
            b = max(b if b else 0, math.ceil(d / delta_h))
        if not link("blow_up_factor_fits", b >= 1 and b * H.n <= n,
                    factor=b, subgraphOrder=H.n, n=n):
            wit.failing_link = "blow_up_factor_fits"
            return wit
        sizes = np.full(H.n, b, dtype=np.int64)
        extra = n - b * H.n
        sizes[:extra % H.n] += 1
        sizes += extra // H.n
        final = blow_up(H, sizes)

    fstats = graph_stats(final)
    wit.checks = {
        "vertexCount": fstats["n"],
        "minDeg": fstats["minDeg"],
        "triangleFree": fstats["triangleFree"],
    }
    ok_n = link("vertex_count_exact", fstats["n"] == n, got=fstats["n"])
    ok_t = link("triangle_free", fstats["triangleFree"])
    ok_d = link("min_degree_at_least_d", fstats["minDeg"] >= d,
                minDeg=fstats["minDeg"], d=d)
    if ok_n and ok_t and ok_d:
        wit.graph = final
        wit.ok = True
        bound = GND_CDOUBLE * max(math.log(d), d * d / n)
        wit.checks["bipartiteBound"] = bound
    else:
        wit.graph = final
        wit.failing_link = next(l["name"] for l in wit.links if not l["ok"])
    return wit
