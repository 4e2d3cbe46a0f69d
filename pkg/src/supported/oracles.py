"""Exact ground-truth solvers for small instances.

These are deliberately independent of the distributed algorithms they are
used to check: plain dynamic programming and exhaustive search.
"""

import itertools
from typing import Iterable, Optional

from . import kernels
from .errors import SizeCap
from .graph import Graph, RootedTree, is_proper

INF = float("inf")


def dominates(g: Graph, clients: Iterable[int], d: Iterable[int]) -> bool:
    d = set(d)
    return all(c in d or any(w in d for w in g.adj[c]) for c in clients)


def client_list(mask) -> list:
    return [v for v, b in enumerate(mask) if b]


def cds_tree_dp(t: RootedTree, clients) -> tuple[int, set]:
    """Minimum client dominating set on a tree.

    Per vertex, three subtree states: 0 = in D; 1 = not in D and settled
    (dominated by a child, or not a client); 2 = not in D, a client still
    waiting for its parent.
    """
    n = t.graph.n
    is_client = as_mask(clients, n)
    dp = [None] * n
    for v in reversed(t.order):
        kids = t.children[v]
        s0 = 1 + sum(min(dp[c]) for c in kids)
        base = sum(min(dp[c][0], dp[c][1]) for c in kids)
        if is_client[v]:
            if kids:
                extra = min(dp[c][0] - min(dp[c][0], dp[c][1]) for c in kids)
                s1 = base + extra
            else:
                s1 = INF
            s2 = sum(dp[c][1] for c in kids)
        else:
            s1 = base
            s2 = INF
        dp[v] = (s0, s1, s2)
    root = t.root
    best = min(dp[root][0], dp[root][1])
    # reconstruct top-down
    members = set()
    want = {root: 0 if dp[root][0] <= dp[root][1] else 1}
    for v in t.order:
        st = want[v]
        kids = t.children[v]
        if st == 0:
            members.add(v)
            for c in kids:
                want[c] = min(range(3), key=lambda s: (dp[c][s], s))
        elif st == 2:
            for c in kids:
                want[c] = 1
        else:
            picks = {c: (0 if dp[c][0] <= dp[c][1] else 1) for c in kids}
            if is_client[v] and not any(p == 0 for p in picks.values()):
                forced = min(kids, key=lambda c: (dp[c][0] - min(dp[c][0], dp[c][1]), c))
                picks[forced] = 0
            want.update(picks)
    return int(best), members


def cds_bruteforce(g: Graph, clients, cap: int = 20) -> tuple[int, set]:
    """Exact minimum client dominating set by increasing-size search."""
    if g.n > cap:
        raise SizeCap(f"n={g.n} exceeds cap {cap}")
    cl = client_list(as_mask(clients, g.n))
    closed = [(1 << v) | sum(1 << w for w in g.adj[v]) for v in range(g.n)]
    cmask = sum(1 << c for c in set(cl))
    size, mask = kernels.min_cover(closed, cmask, g.n)
    return size, {v for v in range(g.n) if mask >> v & 1}


def as_mask(clients, n: int) -> list:
    """Accept a boolean mask or a collection of vertex ids."""
    if isinstance(clients, (set, frozenset)):
        return [v in clients for v in range(n)]
    clients = list(clients)
    if len(clients) == n and all(isinstance(b, bool) for b in clients):
        return clients
    s = set(clients)
    return [v in s for v in range(n)]


def reduction_graph(g: Graph, clients) -> Graph:
    """G plus a two-vertex path u1-u2 with u1 joined to every non-client."""
    cset = set(client_list(as_mask(clients, g.n)))
    u1, u2 = g.n, g.n + 1
    extra = [(u1, v) for v in range(g.n) if v not in cset] + [(u1, u2)]
    return Graph(g.n + 2, list(g.edges) + extra)


def dominating_set_size(g: Graph, cap: int = 22) -> int:
    if g.n > cap:
        raise SizeCap(f"n={g.n} exceeds cap {cap}")
    closed = [(1 << v) | sum(1 << w for w in g.adj[v]) for v in range(g.n)]
    return kernels.min_cover(closed, (1 << g.n) - 1, g.n)[0]


def _colorable(g: Graph, order: list, fixed: dict, palette: list, new_from: int = None) -> Optional[dict]:
    """Backtracking assignment of palette colors to `order` vertices.

    Colors at index >= new_from are interchangeable fresh colors; a fresh
    color may be used only after all earlier fresh colors (symmetry breaking).
    """
    color = dict(fixed)
    if new_from is None:
        new_from = len(palette)

    def rec(i, fresh_used):
        if i == len(order):
            return True
        v = order[i]
        blocked = {color[w] for w in g.adj[v] if w in color}
        limit = min(len(palette), new_from + fresh_used + 1)
        for idx in range(limit):
            c = palette[idx]
            if c in blocked:
                continue
            color[v] = c
            if rec(i + 1, max(fresh_used, idx - new_from + 1)):
                return True
            del color[v]
        return False

    return color if rec(0, 0) else None


def _search_order(g: Graph, verts: Iterable[int]) -> list:
    verts = list(verts)
    order = []
    left = set(verts)
    while left:
        # most already-ordered neighbors first, then degree, then id
        placed = set(order)
        v = max(left, key=lambda u: (sum(w in placed for w in g.adj[u]), g.degree(u), -u))
        order.append(v)
        left.remove(v)
    return order


def chromatic_exact(g: Graph, cap: int = 20) -> tuple[int, list]:
    if g.n > cap:
        raise SizeCap(f"n={g.n} exceeds cap {cap}")
    if g.n == 0:
        return 0, []
    order = _search_order(g, range(g.n))
    for k in range(1, g.n + 1):
        res = _colorable(g, order, {}, list(range(1, k + 1)), new_from=0)
        if res is not None:
            return k, [res[v] for v in range(g.n)]
    raise AssertionError("unreachable")


def cc_exact(g: Graph, pc: dict, objective: str = "chi_new", cap: int = 12) -> tuple[int, list]:
    """Completion of pc minimizing new colors (equivalently the total palette).

    The cap applies to the number of vertices left uncolored by pc.
    """
    if objective not in ("chi_new", "chi_all"):
        raise ValueError(f"unknown objective {objective!r}")
    free = [v for v in range(g.n) if not pc.get(v)]
    if len(free) > cap:
        raise SizeCap(f"{len(free)} uncolored vertices exceed cap {cap}")
    pc_colors = sorted(set(c for c in pc.values() if c))
    fresh = []
    c = 1
    while len(fresh) < len(free):
        if c not in pc_colors:
            fresh.append(c)
        c += 1
    fixed = {v: c for v, c in pc.items() if c}
    order = _search_order(g, free)
    for j in range(len(free) + 1):
        res = _colorable(g, order, fixed, pc_colors + fresh[:j], new_from=len(pc_colors))
        if res is not None:
            final = [res.get(v, 0) for v in range(g.n)]
            new = len(set(final[v] for v in free) - set(pc_colors))
            value = new if objective == "chi_new" else len(pc_colors) + new
            return value, final
    raise AssertionError("unreachable")


def lcl_exhaustive(spec, n: int) -> list:
    """All label sequences of length n accepted by the rules of `spec`."""
    if n > 10:
        raise SizeCap("exhaustive enumeration limited to n <= 10")
    out = []
    for lab in itertools.product(spec.sigma_out, repeat=n):
        if _rules_ok(spec, lab):
            out.append(lab)
    return out


def _rules_ok(spec, lab) -> bool:
    n = len(lab)
    if n == 1:
        return lab[0] in spec.singletons
    if (lab[0], lab[1]) not in spec.pairs or (lab[-1], lab[-2]) not in spec.pairs:
        return False
    return all(tuple(lab[i - 1:i + 2]) in spec.triples for i in range(1, n - 1))


def lcl_count(spec, n: int) -> int:
    """Number of valid labellings via a DP over the last two labels."""
    if n == 1:
        return len(set(spec.singletons))
    sig = list(spec.sigma_out)
    cur = {(a, b): 1 for a in sig for b in sig if (a, b) in spec.pairs}
    for _ in range(n - 2):
        nxt = {}
        for (a, b), cnt in cur.items():
            for c in sig:
                if (a, b, c) in spec.triples:
                    nxt[(b, c)] = nxt.get((b, c), 0) + cnt
        cur = nxt
    return sum(cnt for (a, b), cnt in cur.items() if (b, a) in spec.pairs)


def is_matching(g: Graph, active: set, matching: Iterable) -> tuple[bool, bool]:
    """(endpoint-disjoint subset of active edges, maximal on active edges)."""
    seen = set()
    for u, v in matching:
        e = (min(u, v), max(u, v))
        if e not in active or u in seen or v in seen:
            return False, False
        seen.update((u, v))
    maximal = all(u in seen or v in seen for u, v in active)
    return True, maximal


def is_mis(g: Graph, active: set, members: Iterable[int]) -> tuple[bool, bool]:
    """(independent on active edges, maximal on the active subgraph)."""
    mem = set(members)
    nbrs = [set() for _ in range(g.n)]
    for u, v in active:
        nbrs[u].add(v)
        nbrs[v].add(u)
    indep = all(not (u in mem and v in mem) for u, v in active)
    maximal = all(v in mem or nbrs[v] & mem for v in range(g.n))
    return indep, maximal


def check_proper_extension(g: Graph, pc: dict, coloring) -> bool:
    return (is_proper(g, coloring) and all(c > 0 for c in coloring)
            and all(coloring[v] == c for v, c in pc.items() if c))
