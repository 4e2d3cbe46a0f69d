"""Static support graphs: representation, generators, rooting and forest peeling."""

import json
import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import networkx as nx
from scipy.spatial import Delaunay

from .errors import BudgetExceeded, InvalidInput, InvalidSize, NotATree


class Graph:
    """Undirected simple graph on vertices 0..n-1 with sorted adjacency lists.

    Instances are treated as immutable; the adjacency is stored as tuples.
    """

    __slots__ = ("n", "adj", "_edges", "_edge_index", "_nbr_sets")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise InvalidSize(f"negative vertex count {n}")
        nbrs = [set() for _ in range(n)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InvalidInput(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInput(f"edge ({u},{v}) out of range for n={n}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n = n
        self.adj = tuple(tuple(sorted(s)) for s in nbrs)
        self._nbr_sets = tuple(frozenset(s) for s in nbrs)
        self._edges = None
        self._edge_index = None

    @property
    def edges(self) -> tuple:
        """Edges (u, v) with u < v, sorted lexicographically."""
        if self._edges is None:
            self._edges = tuple((u, v) for u in range(self.n) for v in self.adj[u] if u < v)
        return self._edges

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_index(self, u: int, v: int) -> int:
        if self._edge_index is None:
            self._edge_index = {e: i for i, e in enumerate(self.edges)}
        if u > v:
            u, v = v, u
        return self._edge_index[(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def neighbor_set(self, v: int) -> frozenset:
        return self._nbr_sets[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def subgraph_edges(self, keep) -> "Graph":
        """Same vertex set, only the edges for which keep(u, v) is true."""
        return Graph(self.n, [e for e in self.edges if keep(*e)])

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list]:
        """Induced subgraph relabelled to 0..k-1; returns (graph, original ids)."""
        verts = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(verts)}
        es = [(pos[u], pos[v]) for u in verts for v in self.adj[u] if v in pos and u < v]
        return Graph(len(verts), es), verts

    def ball(self, v: int, r: int) -> dict:
        """Vertices within distance r of v, mapped to their distance."""
        dist = {v: 0}
        q = deque([v])
        while q:
            u = q.popleft()
            if dist[u] == r:
                continue
            for w in self.adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    def bfs_distances(self, src: int) -> list:
        dist = [-1] * self.n
        dist[src] = 0
        q = deque([src])
        while q:
            u = q.popleft()
            for w in self.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    def components(self) -> list:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            q = deque([s])
            while q:
                u = q.popleft()
                for w in self.adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        q.append(w)
            comps.append(sorted(comp))
        return comps

    def is_tree(self) -> bool:
        return self.n >= 1 and self.m == self.n - 1 and len(self.components()) == 1

    def to_networkx(self) -> nx.Graph:
        h = nx.Graph()
        h.add_nodes_from(range(self.n))
        h.add_edges_from(self.edges)
        return h

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class RootedTree:
    graph: Graph
    root: int
    parent: tuple
    depth: tuple
    children: tuple = field(repr=False)
    order: tuple = field(repr=False)  # BFS order from the root

    def path_to_root(self, v: int) -> list:
        out = [v]
        while self.parent[v] is not None:
            v = self.parent[v]
            out.append(v)
        return out


@dataclass(frozen=True)
class ForestDecomposition:
    forests: tuple  # tuple of tuples of edges (u, v), u < v


def generate_path(n: int) -> Graph:
    if n < 1:
        raise InvalidSize("path needs n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def generate_cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidSize("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def generate_star(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def generate_complete(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def generate_random_tree(n: int, seed: int) -> Graph:
    """Uniform labelled tree decoded from a random Pruefer sequence."""
    if n < 1:
        raise InvalidSize("tree needs n >= 1")
    if n == 1:
        return Graph(1)
    if n == 2:
        return Graph(2, [(0, 1)])
    rng = random.Random(seed)
    seq = [rng.randrange(n) for _ in range(n - 2)]
    t = nx.from_prufer_sequence(seq)
    return Graph(n, t.edges())


def generate_random_graph(n: int, p: float, seed: int) -> Graph:
    rng = random.Random(seed)
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])


def generate_random_planar(n: int, seed: int, keep: float = 0.7) -> Graph:
    """Delaunay triangulation of random points, then independent edge deletion.

    A triangulation of points in the plane is a straight-line embedding, so the
    result is planar by construction; deleting edges preserves planarity.
    """
    if n < 1:
        raise InvalidSize("planar graph needs n >= 1")
    rng = random.Random(seed)
    if n <= 3:
        cand = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        pts = [(rng.random(), rng.random()) for _ in range(n)]
        tri = Delaunay(pts)
        cand = set()
        for a, b, c in tri.simplices:
            for u, v in ((a, b), (b, c), (a, c)):
                u, v = int(u), int(v)
                cand.add((min(u, v), max(u, v)))
        cand = sorted(cand)
    return Graph(n, [e for e in cand if rng.random() < keep])


def root_at(g: Graph, r: int) -> RootedTree:
    if not 0 <= r < g.n:
        raise InvalidInput(f"root {r} out of range")
    if not g.is_tree():
        raise NotATree("graph is not a tree")
    parent = [None] * g.n
    depth = [0] * g.n
    order = [r]
    seen = [False] * g.n
    seen[r] = True
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for w in g.adj[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                depth[w] = depth[u] + 1
                order.append(w)
    children = [[] for _ in range(g.n)]
    for v in order[1:]:
        children[parent[v]].append(v)
    return RootedTree(g, r, tuple(parent), tuple(depth),
                      tuple(tuple(c) for c in children), tuple(order))


class _DSU:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        self.p[a] = b
        return True


def is_forest(n: int, edges: Iterable[Sequence[int]]) -> bool:
    dsu = _DSU(n)
    return all(dsu.union(u, v) for u, v in edges)


def forest_decompose(g: Graph, target: int) -> ForestDecomposition:
    """Peel spanning forests off the remaining edges until none are left."""
    if target < 1:
        raise InvalidInput("target must be positive")
    remaining = list(g.edges)
    forests = []
    while remaining:
        if len(forests) == target:
            raise BudgetExceeded(f"{len(remaining)} edges left after {target} forests")
        dsu = _DSU(g.n)
        taken, rest = [], []
        for e in remaining:
            (taken if dsu.union(*e) else rest).append(e)
        forests.append(tuple(taken))
        remaining = rest
    return ForestDecomposition(tuple(forests))


def greedy_chromatic_upper(g: Graph) -> tuple[int, list]:
    """Ascending-id greedy coloring with colors 1, 2, ..."""
    color = [0] * g.n
    for v in range(g.n):
        used = {color[w] for w in g.adj[v]}
        c = 1
        while c in used:
            c += 1
        color[v] = c
    return max(color, default=0), color


def is_proper(g: Graph, coloring: Sequence[int]) -> bool:
    return all(coloring[u] != coloring[v] for u, v in g.edges)


def load_graph(path) -> Graph:
    """Read a graph from JSON ({"n", "edges"}) or an edge-list text file."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        if "n" not in data or "edges" not in data:
            raise InvalidInput(f"{path}: expected keys 'n' and 'edges'")
        return Graph(int(data["n"]), data["edges"])
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, p) for i, p in lines if p and not p[0].startswith("#")]
    if not lines:
        raise InvalidInput(f"{path}: empty graph file")
    try:
        n = int(lines[0][1][0])
        edges = []
        for lineno, parts in lines[1:]:
            if len(parts) != 2:
                raise InvalidInput(f"{path}: line {lineno}: expected 'u v'")
            edges.append((int(parts[0]), int(parts[1])))
    except ValueError as exc:
        raise InvalidInput(f"{path}: non-integer token ({exc})") from exc
    return Graph(n, edges)


def save_graph(g: Graph, path) -> None:
    Path(path).write_text(json.dumps(g.to_json()) + "\n")
