"""Client dominating set on planar graphs.

Constant-round 39-approximation, non-repetitive coloring preprocessing,
Cole-Vishkin 3-coloring of cluster pseudo-forests, and the (1+eps)
clustering scheme with exact per-cluster solving.
"""

import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import kernels
from .errors import InvalidColoring, NotFound, SizeCap
from .graph import Graph, greedy_chromatic_upper
from .oracles import as_mask, cds_bruteforce
from .sim import (NodeProgram, RecurrentInstance, RunReport, client_set,
                  run_instance, run_preprocess)

log = logging.getLogger(__name__)

SHARED_CLIENTS = 10


# ---------------------------------------------------------------- approx39

def _client_nbrs(g: Graph, is_client) -> list:
    return [frozenset(w for w in g.adj[v] if is_client[w]) for v in range(g.n)]


def cover_witness(v: int, targets: frozenset, closed_of, limit: int = 3) -> Optional[tuple]:
    """A set A of at most `limit` vertices, none equal to v, whose closed
    neighborhoods contain every target client; None if no such set exists.

    closed_of(c) returns the closed neighborhood of client c, i.e. the
    possible dominators of c.
    """
    targets = sorted(targets)

    def rec(uncovered, chosen):
        if not uncovered:
            return tuple(chosen)
        if len(chosen) == limit:
            return None
        c = uncovered[0]
        for u in sorted(closed_of(c)):
            if u == v:
                continue
            rest = [x for x in uncovered if u not in closed_of(x)]
            res = rec(rest, chosen + [u])
            if res is not None:
                return res
        return None

    return rec(targets, [])


@dataclass
class Approx39Result:
    d1: set
    d2: set
    d3: set
    witnesses: dict  # v not in D1 with clients -> covering set of size <= 3

    @property
    def dominators(self) -> set:
        return self.d1 | self.d2 | self.d3


def approx39(g: Graph, clients) -> Approx39Result:
    """Sequential mirror of the 39-approximation."""
    is_client = as_mask(clients, g.n)
    nc = _client_nbrs(g, is_client)

    def closed_of(c):
        return g.neighbor_set(c) | {c}

    d1, witnesses = set(), {}
    for v in range(g.n):
        if not nc[v]:
            continue
        a = cover_witness(v, nc[v], closed_of)
        if a is None:
            d1.add(v)
        else:
            witnesses[v] = a
    d2 = set()
    for v in range(g.n):
        if v in d1 or not nc[v]:
            continue
        if _has_heavy_partner(v, nc, g, d1):
            d2.add(v)
    dom = d1 | d2
    d3 = {c for c in range(g.n) if is_client[c] and c not in dom and not (g.neighbor_set(c) & dom)}
    return Approx39Result(d1, d2, d3, witnesses)


def _has_heavy_partner(v, nc, g, d1) -> bool:
    """B_v is non-empty: some w outside D1 shares at least 10 clients with v."""
    count = {}
    for c in nc[v]:
        for w in g.adj[c]:
            if w != v:
                count[w] = count.get(w, 0) + 1
    return any(cnt >= SHARED_CLIENTS and w not in d1 for w, cnt in count.items())


class Approx39Program(NodeProgram):
    """Four-round protocol for the 39-approximation; no preprocessing."""

    name = "approx39"
    payload_bits = 0

    def init(self, ctx):
        st = {"ctx": ctx, "round": 0, "client": bool(ctx.local)}
        msg = ("ADJ", st["client"], ctx.neighbors)
        return st, {w: msg for w in ctx.neighbors}, None

    def on_round(self, st, inbox):
        st["round"] += 1
        r = st["round"]
        ctx = st["ctx"]
        v = ctx.id
        if r == 1:
            adj = {w: set(m[2]) | {w} for w, m in inbox.items()}
            clients = frozenset(w for w, m in inbox.items() if m[1])
            st["nc"] = clients
            in_d1 = False
            if clients:
                a = cover_witness(v, clients, lambda c: adj[c])
                ctx.count(len(clients) ** 2)
                in_d1 = a is None
            st["d1"] = in_d1
            msg = ("D1", {v: (in_d1, clients)})
            return st, {w: msg for w in ctx.neighbors}, None
        if r == 2:
            known = {v: (st["d1"], st["nc"])}
            for m in inbox.values():
                known.update(m[1])
            st["known"] = known
            msg = ("D1", dict(known))
            return st, {w: msg for w in ctx.neighbors}, None
        if r == 3:
            known = st["known"]
            for m in inbox.values():
                known.update(m[1])
            in_d2 = False
            if not st["d1"] and st["nc"]:
                for w, (w_d1, w_nc) in known.items():
                    if w != v and not w_d1 and len(st["nc"] & w_nc) >= SHARED_CLIENTS:
                        in_d2 = True
                        break
            st["member"] = st["d1"] or in_d2
            msg = ("MEM", st["member"])
            return st, {w: msg for w in ctx.neighbors}, None
        member = st["member"]
        if not member and st["client"]:
            member = not any(m[1] for m in inbox.values())
        return st, {}, member


def approx39_distributed(g: Graph, clients, round_cap: int = 100) -> tuple[set, RunReport]:
    prog = Approx39Program()
    pre = run_preprocess(g, prog)
    inst = client_set(g.n, [v for v, b in enumerate(as_mask(clients, g.n)) if b])
    rep = run_instance(g, pre, prog, inst, round_cap)
    return {v for v, o in enumerate(rep.outputs) if o}, rep


# ------------------------------------------------- non-repetitive coloring

@dataclass(frozen=True)
class NonRepetitiveColoring:
    colors: tuple
    palette: int
    checked_half: int  # repetitions were excluded for half-lengths up to this


def verify_nonrepetitive(g: Graph, colors, max_half: int, sources=None) -> Optional[list]:
    """A repetitively colored simple path with at most 2*max_half vertices, or None.

    With `sources`, only paths starting there are examined.
    """
    return kernels.find_repetition(g.adj, list(colors), max_half, sources)


def compute_nonrepetitive_coloring(g: Graph, budget: int = 768, seed: int = 0,
                                   max_half: Optional[int] = None, start_palette: int = 4,
                                   attempts_per_palette: int = 400) -> NonRepetitiveColoring:
    """Greedy proper coloring repaired by resampling a vertex on each repetition found.

    Only start vertices near a recolored vertex are searched again. The
    palette grows when repairs stall, and the final coloring is re-verified
    from scratch, so the result is exact up to max_half.
    """
    if max_half is None:
        max_half = max(1, g.n // 2)
    if g.n == 0:
        return NonRepetitiveColoring((), 0, max_half)
    rng = random.Random(seed)
    used, colors = greedy_chromatic_upper(g)
    palette = min(budget, max(start_palette, used))
    reach = 2 * max_half - 1
    dirty = set(range(g.n))
    while True:
        for _ in range(attempts_per_palette):
            order = sorted(dirty)
            bad = verify_nonrepetitive(g, colors, max_half, order)
            if bad is None:
                if verify_nonrepetitive(g, colors, max_half) is None:
                    return NonRepetitiveColoring(tuple(colors), palette, max_half)
                dirty = set(range(g.n))
                continue
            dirty.difference_update(order[:order.index(bad[0])])
            v = rng.choice(bad)
            colors[v] = rng.randint(1, palette)
            dirty.update(g.ball(v, reach))
        if palette >= budget:
            raise NotFound(f"no non-repetitive coloring found with palette {budget}")
        palette = min(budget, palette + max(1, palette // 2))


# --------------------------------------------------------- cluster graphs

@dataclass
class ClusterGraph:
    """Clusters of a base graph, contracted to a weighted simple graph.

    Cluster ids are the smallest original vertex id in the cluster.
    Vertices outside every cluster have cluster_of = -1.
    """

    base: Graph
    level: int
    cluster_of: list
    members: dict
    weights: dict  # (a, b) with a < b -> positive weight
    diameter: int = 0
    history: list = field(default_factory=list)

    @property
    def nodes(self) -> list:
        return sorted(self.members)

    @property
    def total_weight(self) -> int:
        return sum(self.weights.values())

    def neighbors(self, a: int) -> dict:
        out = {}
        for (x, y), w in self.weights.items():
            if x == a:
                out[y] = w
            elif y == a:
                out[x] = w
        return out

    def to_json(self) -> dict:
        return {"level": self.level,
                "clusters": {str(c): m for c, m in sorted(self.members.items())},
                "weights": [[a, b, w] for (a, b), w in sorted(self.weights.items())]}


def _crossing_weights(base: Graph, cluster_of: list) -> dict:
    wts = {}
    for u, v in base.edges:
        a, b = cluster_of[u], cluster_of[v]
        if a < 0 or b < 0 or a == b:
            continue
        key = (min(a, b), max(a, b))
        wts[key] = wts.get(key, 0) + 1
    return wts


def _relabel(parts: dict) -> dict:
    """parts: any key -> vertex list; returns the same groups keyed by min id."""
    members = {}
    for verts in parts.values():
        verts = sorted(verts)
        members[verts[0]] = verts
    return members


def induced_diameter(base: Graph, verts) -> int:
    vs = set(verts)
    best = 0
    for s in vs:
        dist = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in base.adj[u]:
                if w in vs and w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        if len(dist) != len(vs):
            return math.inf
        best = max(best, max(dist.values()))
    return best


def _bfs_tree(base: Graph, verts, root) -> dict:
    vs = set(verts)
    parent = {root: None}
    q = deque([root])
    while q:
        u = q.popleft()
        for w in base.adj[u]:
            if w in vs and w not in parent:
                parent[w] = u
                q.append(w)
    return parent


# ------------------------------------------------ pseudo-forest 3-coloring

def _cv_schedule(bound: int) -> int:
    """Cole-Vishkin steps needed to bring colors below `bound` into 0..5."""
    steps = 0
    while bound > 6:
        bits = max(1, (bound - 1).bit_length())
        bound = 2 * bits
        steps += 1
    return steps


class ColeVishkinProgram(NodeProgram):
    """3-coloring of an out-degree-1 orientation given a proper start coloring.

    Local input: (start color >= 1, out-neighbor or None). All nodes know the
    global color bound, hence the number of reduction steps.
    """

    name = "cole-vishkin"

    def __init__(self, color_bound: int):
        self.steps = _cv_schedule(color_bound + 1)

    def init(self, ctx):
        c, out = ctx.local
        st = {"ctx": ctx, "c": c - 1, "out": out, "round": 0}
        return st, {w: st["c"] for w in ctx.neighbors}, None

    def on_round(self, st, inbox):
        st["round"] += 1
        r = st["round"]
        ctx = st["ctx"]
        out = st["out"]
        c = st["c"]
        pc = inbox.get(out) if out is not None else None
        if r <= self.steps:
            if pc is None:
                st["c"] = c & 1
            else:
                diff = c ^ pc
                i = (diff & -diff).bit_length() - 1
                st["c"] = 2 * i + ((c >> i) & 1)
            return st, {w: st["c"] for w in ctx.neighbors}, None
        k = r - self.steps  # 1..6: shift-down for odd k, recolor for even k
        target = 5 - (k - 1) // 2
        if k % 2 == 1:
            if pc is None:
                st["c"] = 0 if c != 0 else 1
            else:
                st["c"] = pc
        elif c == target:
            used = set(inbox.values())
            st["c"] = min(x for x in (0, 1, 2) if x not in used)
        if k == 6:
            return st, {}, st["c"] + 1
        return st, {w: st["c"] for w in ctx.neighbors}, None


def _encode_sequence(seq, base: int) -> int:
    """Injective over sequences of digits 1..base-1, including across lengths."""
    code = 0
    for x in seq:
        code = code * base + x
    return code


def interim_colors(cg: ClusterGraph, pf: dict, nrc: NonRepetitiveColoring) -> tuple[dict, dict]:
    """Encoded color sequence along path(v) for every cluster; also the paths."""
    base = cg.base
    anchor = {}   # cluster -> r_v
    cross = {}    # cluster -> (r_v, other endpoint)
    for v in cg.nodes:
        p = pf.get(v)
        if p is None:
            anchor[v] = cg.members[v][0]
            continue
        best = None
        for u in cg.members[v]:
            for w in base.adj[u]:
                if cg.cluster_of[w] == p:
                    e = (min(u, w), max(u, w))
                    if best is None or e < best[0]:
                        best = (e, u, w)
        if best is None:
            raise InvalidColoring(f"cluster {v} has no edge to its out-neighbor {p}")
        anchor[v] = best[1]
        cross[v] = (best[1], best[2])
    trees = {v: _bfs_tree(base, cg.members[v], anchor[v]) for v in cg.nodes}
    paths = {}
    for v in cg.nodes:
        p = pf.get(v)
        if p is None or (pf.get(p) == v and v > p):
            paths[v] = [anchor[v]]
            continue
        r_v, x = cross[v]
        path = [r_v]
        tp = trees[p]
        while x != anchor[p]:
            path.append(x)
            x = tp[x]
        paths[v] = path
    B = nrc.palette + 1
    codes = {v: _encode_sequence([nrc.colors[u] for u in paths[v]], B) for v in cg.nodes}
    for v, p in pf.items():
        if p is not None and codes[v] == codes[p]:
            raise InvalidColoring(f"clusters {v} and {p} received the same interim color")
    return codes, paths


@dataclass
class ThreeColoring:
    colors: dict
    cv_rounds: int
    interim_bound: int
    base_rounds: int  # estimate in rounds of the original graph


def three_color_pseudoforest(cg: ClusterGraph, pf: dict, nrc: NonRepetitiveColoring) -> ThreeColoring:
    nodes = cg.nodes
    if not nodes:
        return ThreeColoring({}, 0, 0, 0)
    codes, _ = interim_colors(cg, pf, nrc)
    idx = {c: i for i, c in enumerate(nodes)}
    edges = {(min(idx[v], idx[p]), max(idx[v], idx[p])) for v, p in pf.items() if p is not None}
    h = Graph(len(nodes), edges)
    d = max(cg.diameter, 0)
    bound = max(max(codes.values()), (nrc.palette + 1) ** (d + 2))
    prog = ColeVishkinProgram(bound)
    pre = run_preprocess(h, prog)
    payload = [(codes[c], idx[pf[c]] if pf.get(c) is not None else None) for c in nodes]
    rep = run_instance(h, pre, prog, RecurrentInstance("input-labels", tuple(payload)))
    colors = {c: rep.outputs[idx[c]] for c in nodes}
    for v, p in pf.items():
        if p is not None and colors[v] == colors[p]:
            raise InvalidColoring(f"3-coloring not proper on ({v},{p})")
    # each cluster-graph round costs at most one sweep across two clusters
    base_rounds = (rep.rounds + 1) * (2 * d + 1)
    return ThreeColoring(colors, rep.rounds, bound, base_rounds)


# -------------------------------------------------------------- clustering

def iterations_for(eps: float) -> int:
    return math.ceil(math.log(234 / eps) / math.log(24 / 23))


def initial_clustering(g: Graph, clients) -> tuple[ClusterGraph, set]:
    """Clients join their smallest-id dominator, other vertices their smallest-id client neighbor.

    Client-free edges are dropped first, as are vertices left isolated that
    are not clients.
    """
    is_client = as_mask(clients, g.n)
    pruned = g.subgraph_edges(lambda u, v: is_client[u] or is_client[v])
    dstar = approx39(pruned, is_client).dominators
    target = {}
    for v in range(g.n):
        if v in dstar:
            continue
        if is_client[v]:
            pick = [u for u in pruned.adj[v] if u in dstar]
        else:
            pick = [u for u in pruned.adj[v] if is_client[u]]
        if pick:
            target[v] = pick[0]
    parent = {}

    def find(x):
        while parent.get(x, x) != x:
            x = parent[x]
        return x

    for v, u in target.items():
        a, b = find(v), find(u)
        if a != b:
            parent[a] = b
    keep = [v for v in range(g.n) if pruned.adj[v] or is_client[v]]
    parts = {}
    for v in keep:
        parts.setdefault(find(v), []).append(v)
    members = _relabel(parts)
    cluster_of = [-1] * g.n
    for c, verts in members.items():
        for v in verts:
            cluster_of[v] = c
    weights = {key: 1 for key in _crossing_weights(pruned, cluster_of)}
    diam = max((induced_diameter(pruned, m) for m in members.values()), default=0)
    return ClusterGraph(pruned, 0, cluster_of, members, weights, diam), dstar


def heavy_pseudoforest(cg: ClusterGraph) -> dict:
    """Each cluster points at its heaviest neighbor (ties to the smallest id)."""
    nbrs = {c: {} for c in cg.members}
    for (a, b), w in cg.weights.items():
        nbrs[a][b] = w
        nbrs[b][a] = w
    pf = {}
    for c in cg.nodes:
        if nbrs[c]:
            pf[c] = min(nbrs[c], key=lambda x: (-nbrs[c][x], x))
    return pf


def _star_edges(cg: ClusterGraph, pf: dict, col: dict) -> list:
    """Prune the pseudo-forest to vertex-disjoint stars; returns kept arcs."""
    wt = lambda a, b: cg.weights[(min(a, b), max(a, b))]
    arcs = {}
    for u, p in pf.items():
        if pf.get(p) == u and u < p:
            continue  # a 2-cycle keeps one arc, from the larger id
        arcs[u] = p
    for phase in (1, 2):
        for u in cg.nodes:
            if col.get(u) != phase:
                continue
            ok = (lambda x: True) if phase == 1 else (lambda x: col.get(x) == 3)
            ins = [v for v, p in arcs.items() if p == u and ok(v)]
            outs = [u] if u in arcs and ok(arcs[u]) else []
            w_in = sum(wt(v, u) for v in ins)
            w_out = sum(wt(u, arcs[u]) for _ in outs)
            if w_in < w_out:
                for v in ins:
                    del arcs[v]
            elif outs:
                del arcs[u]
    # root each remaining tree at its smallest id and keep one depth parity
    adj = {}
    for u, p in arcs.items():
        adj.setdefault(u, set()).add(p)
        adj.setdefault(p, set()).add(u)
    depth, comp_diam = {}, 0
    tree_edges = []
    for s in sorted(adj):
        if s in depth:
            continue
        depth[s] = 0
        q = deque([s])
        seen = [s]
        while q:
            x = q.popleft()
            for y in sorted(adj[x]):
                if y not in depth:
                    depth[y] = depth[x] + 1
                    tree_edges.append((x, y))
                    q.append(y)
                    seen.append(y)
        comp_diam = max(comp_diam, max(depth[y] for y in seen))
    even = [(x, y) for x, y in tree_edges if depth[x] % 2 == 0]
    odd = [(x, y) for x, y in tree_edges if depth[x] % 2 == 1]
    w_even = sum(wt(x, y) for x, y in even)
    w_odd = sum(wt(x, y) for x, y in odd)
    return even if w_even >= w_odd else odd


def contract_stars(cg: ClusterGraph, star_edges: list) -> ClusterGraph:
    parent = {c: c for c in cg.members}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in star_edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    parts = {}
    for c, verts in cg.members.items():
        parts.setdefault(find(c), []).extend(verts)
    members = _relabel(parts)
    cluster_of = [-1] * cg.base.n
    for c, verts in members.items():
        for v in verts:
            cluster_of[v] = c
    new_w = {}
    for (a, b), w in cg.weights.items():
        x, y = cluster_of[cg.members[a][0]], cluster_of[cg.members[b][0]]
        if x == y:
            continue
        key = (min(x, y), max(x, y))
        new_w[key] = new_w.get(key, 0) + w
    diam = max((induced_diameter(cg.base, m) for m in members.values()), default=0)
    return ClusterGraph(cg.base, cg.level + 1, cluster_of, members, new_w, diam, cg.history)


def cluster_for_eps(g: Graph, clients, eps: float, nrc: Optional[NonRepetitiveColoring] = None,
                    seed: int = 0) -> ClusterGraph:
    """Initial clustering followed by heavy-star contraction rounds.

    Each level's record in `history` holds the weight before and after, the
    cluster diameters, the 3-coloring cost, and whether the per-level
    guarantees held.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    cg, _ = initial_clustering(g, clients)
    if nrc is None:
        nrc = compute_nonrepetitive_coloring(g, seed=seed, max_half=max(1, g.n // 2))
    history = [{"level": 0, "weight": cg.total_weight, "diameter": cg.diameter,
                "clusters": len(cg.members)}]
    cg.history = history
    total0 = cg.total_weight
    for t in range(iterations_for(eps) + 1):
        if cg.total_weight == 0:
            break
        pf = heavy_pseudoforest(cg)
        tc = three_color_pseudoforest(cg, pf, nrc)
        stars = _star_edges(cg, pf, tc.colors)
        before_w, before_d = cg.total_weight, cg.diameter
        cg = contract_stars(cg, stars)
        history.append({
            "level": cg.level, "weight": cg.total_weight, "diameter": cg.diameter,
            "clusters": len(cg.members), "cv_rounds": tc.cv_rounds, "base_rounds": tc.base_rounds,
            "decay_ok": 24 * cg.total_weight <= 23 * before_w,
            "diameter_ok": cg.diameter <= 3 * before_d + 2,
        })
    cg.history = history
    cg.history[0]["initial_weight"] = total0
    return cg


def solve_clusters(g: Graph, clients, cg: ClusterGraph, cap: int = 30, oversize: str = "fallback") -> set:
    """Exact client domination inside every cluster, cross edges ignored.

    Clusters above `cap` vertices either fall back to approx39 with a warning
    (oversize="fallback") or raise SizeCap (oversize="error").
    """
    is_client = as_mask(clients, g.n)
    d = set()
    for c, verts in sorted(cg.members.items()):
        sub, ids = g.induced(verts)
        sub_clients = [is_client[v] for v in ids]
        if not any(sub_clients):
            continue
        if len(ids) <= cap:
            _, local = cds_bruteforce(sub, sub_clients, cap=cap)
        elif oversize == "error":
            raise SizeCap(f"cluster {c} has {len(ids)} vertices, cap {cap}")
        else:
            log.warning("cluster %d has %d vertices (cap %d); using approx39 inside it", c, len(ids), cap)
            local = approx39(sub, sub_clients).dominators
        d.update(ids[i] for i in local)
    return d


def planar_ctas(g: Graph, clients, eps: float, nrc=None, cap: int = 30, seed: int = 0) -> tuple[set, ClusterGraph]:
    cg = cluster_for_eps(g, clients, eps, nrc=nrc, seed=seed)
    return solve_clusters(g, clients, cg, cap), cg
