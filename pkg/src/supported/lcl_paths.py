"""Locally checkable labellings on paths.

Radius-1 rules are singletons (a lone vertex), ordered end pairs (endpoint
label, its neighbor's label) and ordered triples read left to right. A path
is read in its canonical orientation: starting at the endpoint with the
smaller id. Larger radii are given as allowed views (the 2r+1 labels around
a vertex, None past the path ends) and reduced to radius 1 by windowing.
"""

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .errors import CapExceeded, Inconsistent, InvalidInput, InvalidN0
from .graph import Graph
from .sim import Bits, NodeContext, NodeProgram, RecurrentInstance, pack, run_instance, run_preprocess, unpack

END = "|"
INFEASIBLE = "?"


# ------------------------------------------------------------------ specs

@dataclass(frozen=True)
class LclSpec:
    sigma_out: tuple
    singletons: frozenset = frozenset()
    pairs: frozenset = frozenset()
    triples: frozenset = frozenset()
    r: int = 1
    windows: frozenset = frozenset()
    sigma_in: tuple = ("*",)
    name: str = ""
    decode: Optional[dict] = field(default=None, compare=False)  # window label -> original label

    def __post_init__(self):
        if not self.sigma_out or not self.sigma_in:
            raise InvalidInput("alphabets must be non-empty")
        if self.r < 1:
            raise InvalidInput("radius must be at least 1")
        alpha = set(self.sigma_out)
        bad = [x for x in self.singletons if x not in alpha]
        bad += [t for t in itertools.chain(self.pairs, self.triples) if not set(t) <= alpha]
        bad += [w for w in self.windows if not {x for x in w if x is not None} <= alpha]
        if bad:
            raise InvalidInput(f"rules mention labels outside the alphabet: {bad[:3]}")
        if self.r > 1 and any(len(w) != 2 * self.r + 1 for w in self.windows):
            raise InvalidInput("every view must have 2r+1 entries")

    @property
    def alpha(self) -> int:
        return len(self.sigma_out) ** 2

    def index(self, label) -> int:
        return self.sigma_out.index(label)

    def to_json(self) -> dict:
        out = {"name": self.name, "r": self.r, "sigma_in": list(self.sigma_in),
               "sigma_out": list(self.sigma_out)}
        if self.r == 1:
            out["singletons"] = sorted(self.singletons, key=self.index)
            out["pairs"] = sorted((list(p) for p in self.pairs), key=lambda p: [self.index(x) for x in p])
            out["triples"] = sorted((list(t) for t in self.triples), key=lambda t: [self.index(x) for x in t])
        else:
            out["windows"] = sorted((list(w) for w in self.windows), key=repr)
        return out


def spec_from_json(data: dict) -> LclSpec:
    try:
        sigma = tuple(data["sigma_out"])
        r = int(data.get("r", 1))
        kw = dict(sigma_out=sigma, r=r, name=data.get("name", ""),
                  sigma_in=tuple(data.get("sigma_in", ["*"])))
        if r == 1:
            kw["singletons"] = frozenset(data.get("singletons", []))
            kw["pairs"] = frozenset(tuple(p) for p in data.get("pairs", []))
            kw["triples"] = frozenset(tuple(t) for t in data.get("triples", []))
        else:
            kw["windows"] = frozenset(tuple(w) for w in data.get("windows", []))
        return LclSpec(**kw)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed LCL spec: {exc}") from exc


def load_spec(path) -> LclSpec:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return spec_from_json(data)


def save_spec(spec: LclSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_json(), indent=1) + "\n")


def _legal_view(view) -> bool:
    """None entries only as a prefix and a suffix, the center a real label."""
    r = len(view) // 2
    if view[r] is None:
        return False
    real = [i for i, x in enumerate(view) if x is not None]
    return real == list(range(real[0], real[-1] + 1))


def spec_from_views(sigma_out, r: int, allowed: Callable, name: str = "") -> LclSpec:
    """Radius-r spec whose allowed views are the legal views accepted by `allowed`."""
    sigma = tuple(sigma_out)
    views = set()
    for view in itertools.product(sigma + (None,), repeat=2 * r + 1):
        if _legal_view(view) and allowed(view):
            views.add(view)
    return LclSpec(sigma, r=r, windows=frozenset(views), name=name)


# ------------------------------------------------------------ bundled specs

def mis_spec() -> LclSpec:
    """Independent, and every O has an I neighbor."""
    return LclSpec(("I", "O"), frozenset({"I"}), frozenset({("I", "O"), ("O", "I")}),
                   frozenset({("O", "I", "O"), ("I", "O", "I"), ("I", "O", "O"), ("O", "O", "I")}),
                   name="mis")


def two_coloring_spec() -> LclSpec:
    return LclSpec(("a", "b"), frozenset({"a", "b"}), frozenset({("a", "b"), ("b", "a")}),
                   frozenset({("a", "b", "a"), ("b", "a", "b")}), name="2-coloring")


def acyclic_spec() -> LclSpec:
    """Only the word abc is valid; G_d has no cycle."""
    return LclSpec(("a", "b", "c"), frozenset(), frozenset({("a", "b"), ("c", "b")}),
                   frozenset({("a", "b", "c")}), name="acyclic")


def coprime_cycles_spec(p1: int = 5, p2: int = 7) -> LclSpec:
    """G_d is two directed cycles of lengths p1 and p2 through the vertex (a, b).

    The only start and end vertex on the cycles is (b, c1); realizing every
    residue needs walks of length p1*p2 - max(p1, p2).
    """
    cs = [f"c{i}" for i in range(1, p1 - 1)]
    ds = [f"d{i}" for i in range(1, p2 - 1)]
    sigma = ("a", "b") + tuple(cs) + tuple(ds)
    triples = set()
    for loop in (["a", "b"] + cs, ["a", "b"] + ds):
        m = len(loop)
        for i in range(m):
            triples.add((loop[i], loop[(i + 1) % m], loop[(i + 2) % m]))
    return LclSpec(sigma, frozenset(), frozenset({("b", "c1"), ("c1", "b")}), frozenset(triples),
                   name=f"coprime-{p1}-{p2}")


def ruling_spec() -> LclSpec:
    """Radius 2: chosen vertices (I) are at distance >= 3, every O is within 2 of an I."""
    def allowed(view):
        center = view[2]
        near = [view[i] for i in (0, 1, 3, 4)]
        if center == "I":
            return "I" not in near
        return "I" in near
    return spec_from_views(("I", "O"), 2, allowed, name="ruling-2")


BUNDLED = {
    "mis": mis_spec,
    "2-coloring": two_coloring_spec,
    "acyclic": acyclic_spec,
    "coprime": coprime_cycles_spec,
    "ruling-2": ruling_spec,
}


# --------------------------------------------------------------- checking

def view_at(labels, i: int, r: int) -> tuple:
    n = len(labels)
    return tuple(labels[j] if 0 <= j < n else None for j in range(i - r, i + r + 1))


def rule_check(spec: LclSpec, labels) -> bool:
    labels = list(labels)
    n = len(labels)
    if n == 0:
        return True
    if spec.r > 1:
        return all(view_at(labels, i, spec.r) in spec.windows for i in range(n))
    if n == 1:
        return labels[0] in spec.singletons
    if (labels[0], labels[1]) not in spec.pairs or (labels[-1], labels[-2]) not in spec.pairs:
        return False
    return all((labels[i - 1], labels[i], labels[i + 1]) in spec.triples for i in range(1, n - 1))


@dataclass(frozen=True)
class LabelDigraph:
    vertices: tuple
    succ: dict  # pair -> tuple of successor pairs
    S: frozenset
    T: frozenset
    alpha: int

    def pred(self) -> dict:
        out = {v: [] for v in self.vertices}
        for u, ws in self.succ.items():
            for w in ws:
                out[w].append(u)
        return {v: tuple(p) for v, p in out.items()}


def build_digraph(spec: LclSpec) -> LabelDigraph:
    if spec.r != 1:
        raise InvalidInput("build_digraph needs a radius-1 spec; normalize first")
    order = {x: i for i, x in enumerate(spec.sigma_out)}
    verts = tuple(sorted(itertools.product(spec.sigma_out, repeat=2), key=lambda p: (order[p[0]], order[p[1]])))
    succ = {v: [] for v in verts}
    for a, b, c in spec.triples:
        succ[(a, b)].append((b, c))
    succ = {v: tuple(sorted(ws, key=lambda p: (order[p[0]], order[p[1]]))) for v, ws in succ.items()}
    S = frozenset(p for p in verts if p in spec.pairs)
    T = frozenset(p for p in verts if (p[1], p[0]) in spec.pairs)
    return LabelDigraph(verts, succ, S, T, spec.alpha)


def walk_check(spec: LclSpec, labels, dg: Optional[LabelDigraph] = None) -> bool:
    """The label sequence traces a walk in G_d from S to T (radius-1 specs)."""
    labels = list(labels)
    n = len(labels)
    if n == 0:
        return True
    if n == 1:
        return labels[0] in spec.singletons
    dg = dg or build_digraph(spec)
    walk = [(labels[i], labels[i + 1]) for i in range(n - 1)]
    if walk[0] not in dg.S or walk[-1] not in dg.T:
        return False
    return all(walk[i + 1] in dg.succ.get(walk[i], ()) for i in range(len(walk) - 1))


def validate(spec: LclSpec, labels, method: str = "both") -> bool:
    """Validity of a labelled path; with method="both", the two checks must agree."""
    if any(x == INFEASIBLE for x in labels):
        return False
    if spec.r > 1 or method == "rules":
        return rule_check(spec, labels)
    if method == "walk":
        return walk_check(spec, labels)
    a, b = rule_check(spec, labels), walk_check(spec, labels)
    if a != b:
        raise Inconsistent(f"rule check {a} and walk check {b} disagree on {list(labels)}")
    return a


# ------------------------------------------------------------ normalizing

def normalize_radius(spec: LclSpec) -> LclSpec:
    """Radius-1 spec over windows of 2r-1 labels (None past the ends).

    Every allowed view of the original spec determines the windows of its
    center and both neighbors, which gives the triples; views at path ends
    give end pairs and singletons. `decode` maps a window to its center.
    """
    if spec.r == 1:
        return spec
    r = spec.r
    triples, pairs, singles, alphabet = set(), set(), set(), set()
    for v in spec.windows:
        if not _legal_view(v):
            continue
        left, mid, right = v[0:2 * r - 1], v[1:2 * r], v[2:2 * r + 1]
        has_left, has_right = v[r - 1] is not None, v[r + 1] is not None
        alphabet.add(mid)
        if has_left and has_right:
            triples.add((left, mid, right))
            alphabet.update((left, right))
        elif has_right:
            pairs.add((mid, right))
            alphabet.add(right)
        elif has_left:
            pairs.add((mid, left))
            alphabet.add(left)
        else:
            singles.add(mid)
    sigma = tuple(sorted(alphabet, key=repr))
    decode = {w: w[r - 1] for w in sigma}
    return LclSpec(sigma, frozenset(singles), frozenset(pairs), frozenset(triples),
                   name=f"{spec.name}/r1", decode=decode)


def encode_labels(labels, r: int) -> list:
    labels = list(labels)
    return [view_at(labels, i, r - 1) for i in range(len(labels))]


def decode_labels(norm: LclSpec, windows) -> list:
    return [norm.decode[w] for w in windows]


# -------------------------------------------------------------- walkspans

@dataclass
class WalkTables:
    cycle_len: int
    vertex: tuple
    cycle: list            # closed walk v = c_0, ..., c_k = v
    left: dict             # residue -> shortest walk S..v with that length mod k
    right: dict            # residue -> shortest walk v..T
    cap: int

    @property
    def left_residues(self) -> set:
        return {i for i, w in self.left.items() if len(w) - 1 <= self.cap}

    @property
    def right_residues(self) -> set:
        return {i for i, w in self.right.items() if len(w) - 1 <= self.cap}

    @property
    def satisfied(self) -> bool:
        full = set(range(self.cycle_len))
        return self.left_residues == full and self.right_residues == full


def useful_vertices(dg: LabelDigraph) -> set:
    """Vertices on some S-to-T walk."""
    fwd = set(dg.S)
    q = deque(dg.S)
    while q:
        u = q.popleft()
        for w in dg.succ[u]:
            if w not in fwd:
                fwd.add(w)
                q.append(w)
    pred = dg.pred()
    bwd = set(dg.T)
    q = deque(dg.T)
    while q:
        u = q.popleft()
        for w in pred[u]:
            if w not in bwd:
                bwd.add(w)
                q.append(w)
    return fwd & bwd


def _mod_bfs(sources, step, k: int) -> dict:
    """Shortest walks in the product of G_d with Z_k; state -> parent state."""
    parent = {}
    q = deque()
    for s in sources:
        st = (s, 0)
        if st not in parent:
            parent[st] = None
            q.append(st)
    while q:
        u, i = q.popleft()
        for w in step(u):
            st = (w, (i + 1) % k)
            if st not in parent:
                parent[st] = (u, i)
                q.append(st)
    return parent


def _trace(parent: dict, state) -> list:
    out = []
    while state is not None:
        out.append(state[0])
        state = parent[state]
    return out


def closed_walk(dg: LabelDigraph, v, k: int, allowed: set) -> Optional[list]:
    """A closed walk of exactly k edges from v inside `allowed`, or None."""
    layers = [{v: None}]
    for _ in range(k):
        nxt = {}
        for u in layers[-1]:
            for w in dg.succ[u]:
                if w in allowed and w not in nxt:
                    nxt[w] = u
        layers.append(nxt)
    if v not in layers[k]:
        return None
    walk = [v]
    cur = v
    for j in range(k, 0, -1):
        cur = layers[j][cur]
        walk.append(cur)
    return walk[::-1]


def walkspans(dg: LabelDigraph, cap: Optional[int] = None, stop_at_first: bool = False) -> list:
    """WalkTables for every candidate (k, v) in lexicographic order.

    Candidates are vertices on S-to-T walks with a closed walk of length k,
    1 <= k <= number of such vertices. Walk length counts edges.
    """
    if cap is None:
        cap = 2 * dg.alpha * dg.alpha
    useful = useful_vertices(dg)
    pred = dg.pred()
    fwd_step = lambda u: [w for w in dg.succ[u] if w in useful]
    bwd_step = lambda u: [w for w in pred[u] if w in useful]
    out = []
    for k in range(1, len(useful) + 1):
        cands = [v for v in dg.vertices if v in useful and closed_walk(dg, v, k, useful)]
        if not cands:
            continue
        fparent = _mod_bfs([s for s in dg.S if s in useful], fwd_step, k)
        bparent = _mod_bfs([t for t in dg.T if t in useful], bwd_step, k)
        for v in cands:
            left = {i: _trace(fparent, (v, i))[::-1] for i in range(k) if (v, i) in fparent}
            right = {i: _trace(bparent, (v, i)) for i in range(k) if (v, i) in bparent}
            wt = WalkTables(k, v, closed_walk(dg, v, k, useful), left, right, cap)
            out.append(wt)
            if stop_at_first and wt.satisfied:
                return out
    return out


@dataclass
class Classification:
    verdict: str            # "Theta1" or "ThetaN"
    witness: Optional[WalkTables]
    cap: int
    spec_name: str = ""

    def to_json(self) -> dict:
        out = {"spec": self.spec_name, "verdict": self.verdict, "cap": self.cap}
        if self.witness is not None:
            w = self.witness
            out.update(cycle_len=w.cycle_len, vertex=list(w.vertex),
                       max_left=max(len(x) - 1 for x in w.left.values()),
                       max_right=max(len(x) - 1 for x in w.right.values()))
        return out


def classify(spec: LclSpec, cap: Optional[int] = None) -> Classification:
    norm = normalize_radius(spec)
    dg = build_digraph(norm)
    if cap is None:
        cap = 2 * dg.alpha * dg.alpha
    for wt in walkspans(dg, cap, stop_at_first=True):
        if wt.satisfied:
            return Classification("Theta1", wt, cap, spec.name)
    return Classification("ThetaN", None, cap, spec.name)


def feasible_lengths(spec: LclSpec, n_max: int) -> list:
    """feasible[n] for n = 0..n_max: some valid labelling of P_n exists."""
    norm = normalize_radius(spec)
    dg = build_digraph(norm)
    out = [True, bool(norm.singletons)]
    reach = set(dg.S)
    for n in range(2, n_max + 1):
        out.append(bool(reach & dg.T))
        reach = {w for u in reach for w in dg.succ[u]}
    return out[:n_max + 1]


def infeasible_at_length(spec: LclSpec, n: int) -> bool:
    return not feasible_lengths(spec, n)[n]


# -------------------------------------------------------- path utilities

def path_order(g: Graph) -> list:
    """Vertices of a path graph from the endpoint with the smaller id."""
    if g.n == 1:
        return [0]
    ends = [v for v in range(g.n) if g.degree(v) == 1]
    if g.m != g.n - 1 or len(ends) != 2 or g.max_degree > 2:
        raise InvalidInput("support graph is not a path")
    order = [min(ends)]
    prev = None
    while len(order) < g.n:
        cur = order[-1]
        nxt = [w for w in g.adj[cur] if w != prev]
        prev = cur
        order.append(nxt[0])
    return order


def subpaths(g: Graph, inst: RecurrentInstance) -> list:
    """Maximal runs of active edges in path order; isolated vertices are runs of one."""
    order = path_order(g)
    runs, cur = [], [order[0]]
    for a, b in zip(order, order[1:]):
        if inst.payload[g.edge_index(a, b)]:
            cur.append(b)
        else:
            runs.append(cur)
            cur = [b]
    runs.append(cur)
    return runs


def validate_instance(spec: LclSpec, g: Graph, inst: RecurrentInstance, outputs) -> bool:
    return all(validate(spec, [outputs[v] for v in run]) for run in subpaths(g, inst))


# --------------------------------------------------------------- solvers

class LclPathSolver(NodeProgram):
    """Online solver for a spec classified Theta1.

    Preprocessing keeps two bits per node: the parity of its block (blocks
    of |C| consecutive vertices) and which neighbor lies to the right.
    Online, a node learns its run of active edges up to `radius` hops each
    way and labels itself: block position gives a cycle label, and nodes
    close to a run end copy a witness walk that starts in S (resp. ends in
    T) and joins the cycle at its first label.
    """

    name = "lcl-path-solver"
    payload_bits = 2

    def __init__(self, spec: LclSpec, cls: Classification, threshold: str = "generic"):
        if cls.verdict != "Theta1" or cls.witness is None:
            raise InvalidInput("solver synthesis needs a Theta1 classification")
        if spec.r != 1:
            raise InvalidInput("solver synthesis needs a radius-1 spec")
        self.spec = spec
        self.dg = build_digraph(spec)
        w = cls.witness
        self.k = w.cycle_len
        self.cycle_labels = [p[0] for p in w.cycle[:-1]]
        self.left_labels = {i: [p[0] for p in walk] for i, walk in w.left.items()}
        self.right_labels = {i: [walk[0][0]] + [p[1] for p in walk] for i, walk in w.right.items()}
        max_l = max(len(x) - 1 for x in w.left.values())
        max_r = max(len(x) - 1 for x in w.right.values())
        alpha = spec.alpha
        if threshold == "generic":
            self.threshold = 4 * alpha * alpha + 2 * alpha
        elif threshold == "tight":
            self.threshold = max_l + max_r + 2 + 2 * self.k
        else:
            raise ValueError(f"unknown threshold mode {threshold!r}")
        self.radius = self.threshold
        self._short = {}
        self._runs = {}
        self._layout = None

    # preprocessing
    def preprocess(self, g: Graph, v: int) -> Bits:
        if self._layout is None or self._layout[0] is not g:
            order = path_order(g)
            self._layout = (g, {u: i for i, u in enumerate(order)}, order)
        _, pos, order = self._layout
        i = pos[v]
        psi = (i // self.k) % 2
        nbrs = g.adj[v]
        right = order[i + 1] if i + 1 < g.n else None
        if len(nbrs) == 2:
            bit = int(right == max(nbrs))
        else:
            bit = int(right is not None)
        return pack([(psi, 1), (bit, 1)])

    # local rule shared by the node program and the central mirror
    def short_labels(self, m: int) -> list:
        if m not in self._short:
            self._short[m] = _lex_smallest_labelling(self.spec, self.dg, m)
        return self._short[m]

    def decide(self, psi: int, left: list, left_end: bool, right: list, right_end: bool) -> str:
        """Label of a node seeing psi bits `left` (distance 1, 2, ...) and `right`."""
        k = self.k
        if left_end and right_end:
            m = len(left) + len(right) + 1
            if m < self.threshold:
                return self.short_labels(m)[len(left)]
        bit_at = lambda d: psi if d == 0 else (left[-d - 1] if d < 0 else right[d - 1])
        lo, hi = -len(left), len(right)
        x = len(left) if left_end else None
        a1 = None
        if left_end:
            j = 1
            while lo + j <= hi and bit_at(lo + j) == bit_at(lo + j - 1):
                j += 1
            a1 = j
        d = 0
        while -d > lo and bit_at(-d) == bit_at(-d - 1):
            d += 1
        if -d == lo and left_end:
            idx = (x - a1) % k
        else:
            idx = d % k
        if left_end:
            walk = self.left_labels[a1 % k]
            if x < len(walk) - 1:
                return walk[x]
        if right_end:
            z = len(right)
            j = 1
            while hi - j >= lo and bit_at(hi - j) == bit_at(hi - j + 1):
                j += 1
            b1 = j
            walk = self.right_labels[(b1 - 2) % k]
            l_r = len(walk) - 2
            if z < l_r:
                return walk[l_r + 1 - z]
        return self.cycle_labels[idx]

    # node program
    def init(self, ctx: NodeContext):
        psi, bit = unpack(ctx.payload, [1, 1])
        nbrs = ctx.neighbors
        if len(nbrs) == 2:
            right = max(nbrs) if bit else min(nbrs)
            left = min(nbrs) if bit else max(nbrs)
        elif len(nbrs) == 1:
            right, left = (nbrs[0], None) if bit else (None, nbrs[0])
        else:
            right = left = None
        active = set(ctx.local)
        st = {"ctx": ctx, "psi": psi, "round": 0,
              "lnb": left if left in active else None, "rnb": right if right in active else None,
              "left": [psi], "right": [psi], "sent_l": 0, "sent_r": 0}
        if st["lnb"] is None:
            st["left"].append(END)
        if st["rnb"] is None:
            st["right"].append(END)
        return self._step(st)

    def _step(self, st):
        done_l = st["left"][-1] == END
        done_r = st["right"][-1] == END
        halt = (done_l and done_r) or st["round"] >= self.radius
        out = {}
        # to the right neighbor: what lies on its left, i.e. me and my left side
        # streams hold own psi first, then what lies at distance 1, 2, ...
        stream_l, stream_r = st["left"], st["right"]
        if st["rnb"] is not None and st["sent_r"] < len(stream_l):
            out[st["rnb"]] = ("L", stream_l[st["sent_r"]:])
            st["sent_r"] = len(stream_l)
        if st["lnb"] is not None and st["sent_l"] < len(stream_r):
            out[st["lnb"]] = ("R", stream_r[st["sent_l"]:])
            st["sent_l"] = len(stream_r)
        label = None
        if halt:
            left = [b for b in stream_l[1:self.radius + 1] if b != END]
            right = [b for b in stream_r[1:self.radius + 1] if b != END]
            left_end = END in stream_l[1:self.radius + 2]
            right_end = END in stream_r[1:self.radius + 2]
            st["ctx"].count(len(left) + len(right) + 1)
            label = self.decide(st["psi"], left, left_end, right, right_end)
        return st, out, label

    def on_round(self, st, inbox):
        st["round"] += 1
        for sender, (side, items) in inbox.items():
            (st["left"] if side == "L" else st["right"]).extend(items)
        return self._step(st)

    # central mirror
    def solve_central(self, g: Graph, inst: RecurrentInstance) -> list:
        pre = run_preprocess(g, self)
        psi = [unpack(p, [1, 1])[0] for p in pre.payloads]
        out = [None] * g.n
        for run in subpaths(g, inst):
            for v, lab in zip(run, self.run_labels(tuple(psi[v] for v in run))):
                out[v] = lab
        return out

    def run_labels(self, bits: tuple) -> list:
        """Labels of one run of active edges given its psi bits in path order."""
        if bits in self._runs:
            return self._runs[bits]
        m = len(bits)
        out = []
        for x in range(m):
            lo = max(0, x - self.radius)
            hi = min(m - 1, x + self.radius)
            out.append(self.decide(bits[x], list(bits[lo:x][::-1]), x <= self.radius,
                                   list(bits[x + 1:hi + 1]), m - 1 - x <= self.radius))
        if len(self._runs) < 100_000:
            self._runs[bits] = out
        return out


def _lex_smallest_labelling(spec: LclSpec, dg: LabelDigraph, m: int) -> list:
    order = {x: i for i, x in enumerate(spec.sigma_out)}
    key = lambda p: (order[p[0]], order[p[1]])
    if m == 1:
        singles = sorted(spec.singletons, key=order.get)
        return [singles[0]] if singles else [INFEASIBLE]
    steps = m - 2
    ok = [None] * (steps + 1)
    ok[steps] = set(dg.T)
    for t in range(steps - 1, -1, -1):
        ok[t] = {u for u in dg.vertices if any(w in ok[t + 1] for w in dg.succ[u])}
    starts = sorted((s for s in dg.S if s in ok[0]), key=key)
    if not starts:
        return [INFEASIBLE] * m
    walk = [starts[0]]
    for t in range(1, steps + 1):
        walk.append(min((w for w in dg.succ[walk[-1]] if w in ok[t]), key=key))
    return [walk[0][0]] + [p[1] for p in walk]


def synthesize_solver(spec: LclSpec, cls: Optional[Classification] = None,
                      threshold: str = "generic") -> LclPathSolver:
    if cls is None:
        cls = classify(spec)
    return LclPathSolver(spec, cls, threshold)


def run_solver(prog: LclPathSolver, g: Graph, inst: RecurrentInstance, round_cap: int = 1_000_000):
    pre = run_preprocess(g, prog)
    rep = run_instance(g, pre, prog, inst, round_cap)
    rep.valid = validate_instance(prog.spec, g, inst, rep.outputs)
    rep.extra["preprocess_bits"] = pre.bits
    return rep


def full_path_instance(g: Graph) -> RecurrentInstance:
    return RecurrentInstance("edge-subset", tuple([True] * g.m))


def run_subpath_instance(g: Graph, runs) -> RecurrentInstance:
    """Edge-subset instance whose active edges join consecutive vertices of each run."""
    mask = [False] * g.m
    for run in runs:
        for a, b in zip(run, run[1:]):
            mask[g.edge_index(a, b)] = True
    return RecurrentInstance("edge-subset", tuple(mask))


# ------------------------------------------------------- speedup transform

class SpeedupProgram(NodeProgram):
    """Runs `inner` as if the path had n0 vertices, for t_of(n0) rounds.

    Preprocessing stores the position mod n0 next to the inner payload. Online,
    a node gathers its t-ball for t = t_of(n0) rounds, then replays the inner
    program on that ball (vertices beyond it are silent) and reports the
    inner output it reaches at round t. On paths with at most n0 vertices it
    is the inner program.
    """

    name = "speedup"

    def __init__(self, inner: NodeProgram, t_of: Callable, n0: int):
        t = int(t_of(n0))
        if n0 < 1 or 4 * t >= n0:
            raise InvalidN0(f"need 4*t_of(n0) < n0, got t={t}, n0={n0}")
        self.inner, self.t, self.n0 = inner, t, n0
        self.mod_bits = max(1, (n0 - 1).bit_length())
        self._order = None

    @property
    def spec(self):
        return self.inner.spec

    def preprocess(self, g: Graph, v: int) -> Bits:
        if self._order is None or self._order[0] is not g:
            self._order = (g, {u: i for i, u in enumerate(path_order(g))})
        inner = self.inner.preprocess(g, v)
        return pack([(self._order[1][v] % self.n0, self.mod_bits), (inner.value, inner.width)])

    def _inner_payload(self, payload: Bits) -> Bits:
        width = payload.width - self.mod_bits
        return Bits(payload.value & ((1 << width) - 1), width)

    def init(self, ctx: NodeContext):
        inner_ctx = NodeContext(ctx.id, ctx.n, ctx.neighbors, self._inner_payload(ctx.payload), ctx.local, ctx._meter)
        if ctx.n <= self.n0:
            st, out, res = self.inner.init(inner_ctx)
            return {"direct": True, "inner": st}, out, res
        me = (ctx.id, ctx.neighbors, inner_ctx.payload, ctx.local)
        st = {"direct": False, "ctx": ctx, "known": {ctx.id: me}, "round": 0}
        return st, {w: dict(st["known"]) for w in ctx.neighbors}, None

    def on_round(self, st, inbox):
        if st["direct"]:
            inner_st, out, res = self.inner.on_round(st["inner"], inbox)
            st["inner"] = inner_st
            return st, out, res
        st["round"] += 1
        for known in inbox.values():
            st["known"].update(known)
        ctx = st["ctx"]
        if st["round"] < self.t:
            return st, {w: dict(st["known"]) for w in ctx.neighbors}, None
        return st, {}, self._replay(ctx, st["known"])

    def _replay(self, ctx: NodeContext, known: dict):
        dist = {ctx.id: 0}
        q = deque([ctx.id])
        while q:
            u = q.popleft()
            if dist[u] == self.t:
                continue
            for w in known[u][1]:
                if w in known and w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        states, pending, outputs = {}, {}, {}
        for w in dist:
            wid, nbrs, payload, local = known[w]
            c = NodeContext(wid, self.n0, nbrs, payload, local, ctx._meter)
            s, out, res = self.inner.init(c)
            states[w] = s
            if res is not None:
                outputs[w] = res
            for x, msg in (out or {}).items():
                pending[(w, x)] = msg
        for r in range(1, self.t + 1):
            inboxes = {}
            for (a, b), msg in pending.items():
                inboxes.setdefault(b, {})[a] = msg
            pending = {}
            for w, d in dist.items():
                if w in outputs or d > self.t - r:
                    continue
                s, out, res = self.inner.on_round(states[w], inboxes.get(w, {}))
                states[w] = s
                if res is not None:
                    outputs[w] = res
                for x, msg in (out or {}).items():
                    pending[(w, x)] = msg
            if ctx.id in outputs:
                return outputs[ctx.id]
        if ctx.id in outputs:
            return outputs[ctx.id]
        raise CapExceeded(f"inner program did not finish within {self.t} rounds at node {ctx.id}")


def speedup_transform(inner: NodeProgram, t_of: Callable, n0: int) -> SpeedupProgram:
    return SpeedupProgram(inner, t_of, n0)
