"""Subgraph maximal matching and maximal independent set.

Online instances are edge subsets of the support graph; inactive edges
still carry messages.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvalidColoring, InvalidCover, InvalidInput
from .graph import ForestDecomposition, Graph, RootedTree, is_proper
from .oracles import is_matching, is_mis
from .sim import (Bits, NodeContext, NodeProgram, RecurrentInstance, RunReport, pack,
                  run_instance, run_preprocess, unpack)

NO_PARTNER = (-1, -1)


def active_edge_set(g: Graph, inst: RecurrentInstance) -> set:
    return {e for i, e in enumerate(g.edges) if inst.payload[i]}


# ------------------------------------------------------------- matching

def _root_forest(g: Graph, edges) -> tuple[list, list]:
    """Parent and depth per vertex, each tree rooted at its smallest vertex."""
    adj = [[] for _ in range(g.n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    parent, depth = [None] * g.n, [0] * g.n
    seen = [False] * g.n
    for r in range(g.n):
        if seen[r]:
            continue
        seen[r] = True
        stack = [r]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = u
                    depth[w] = depth[u] + 1
                    stack.append(w)
    return parent, depth


class ForestMatchingProgram(NodeProgram):
    """Maximal matching forest by forest, two request phases per forest.

    In phase j of a forest, an unmatched vertex whose depth is j mod 2 asks
    its parent over an active forest edge; an unmatched parent accepts the
    lowest requesting child. A phase takes 3 rounds and forests are
    separated by one round in which newly matched vertices are announced.
    Output: (partner, phase) or (-1, -1).
    """

    name = "mm-forest"

    def __init__(self, g: Graph, rootings: Sequence[tuple]):
        self.g = g
        self.rootings = list(rootings)  # (parent, depth) per forest
        self.f = len(self.rootings)
        self.payload_bits = None

    @property
    def round_bound(self) -> int:
        return 7 * self.f - 1 if self.f else 0

    def preprocess(self, g: Graph, v: int) -> Bits:
        width = (g.degree(v)).bit_length()
        fields = []
        for parent, depth in self.rootings:
            port = 0 if parent[v] is None else g.adj[v].index(parent[v]) + 1
            fields += [(depth[v] % 2, 1), (port, width)]
        return pack(fields)

    def init(self, ctx: NodeContext):
        width = ctx.degree.bit_length()
        vals = unpack(ctx.payload, [1, width] * self.f)
        forests = []
        for i in range(self.f):
            parity, port = vals[2 * i], vals[2 * i + 1]
            forests.append((parity, ctx.neighbors[port - 1] if port else None))
        st = {"ctx": ctx, "forests": forests, "active": set(ctx.local), "taken": set(), "round": 0}
        if not ctx.local or not self.f:
            return st, {}, NO_PARTNER
        return st, {}, None

    def on_round(self, st, inbox):
        st["round"] += 1
        t = st["round"]
        ctx = st["ctx"]
        requests = []
        accepted_by = None
        for w, tags in inbox.items():
            for tag in tags:
                if tag == "taken":
                    st["taken"].add(w)
                elif tag == "req":
                    requests.append(w)
                elif tag == "acc":
                    accepted_by = w
        forest, step = divmod(t - 1, 7)
        phase = 2 * forest + (step // 3)
        if step == 6 or forest >= self.f:
            return st, {}, None
        parity, parent = st["forests"][forest]
        j, sub = divmod(step, 3)
        if sub == 0:
            if parity == j and parent in st["active"] and parent not in st["taken"]:
                return st, {parent: ("req",)}, None
        elif sub == 1 and requests:
            child = min(requests)
            return st, self._announce(ctx, child, ("acc", "taken")), (child, phase)
        elif sub == 2:
            if accepted_by is not None:
                return st, self._announce(ctx, None, ("taken",)), (accepted_by, phase)
            if t == self.round_bound:
                return st, {}, NO_PARTNER
        return st, {}, None

    @staticmethod
    def _announce(ctx, special, tags):
        out = {w: ("taken",) for w in ctx.neighbors}
        if special is not None:
            out[special] = tags
        return out


def _matching_from(outputs) -> set:
    out = set()
    for v, res in enumerate(outputs):
        if res[0] >= 0:
            out.add((min(v, res[0]), max(v, res[0])))
    return out


def _run_matching(g: Graph, prog: ForestMatchingProgram, inst: RecurrentInstance) -> tuple[set, RunReport]:
    pre = run_preprocess(g, prog)
    rep = run_instance(g, pre, prog, inst, round_cap=max(1, prog.round_bound) + 1)
    # both endpoints must agree on every matched pair
    for v, (w, _) in enumerate(rep.outputs):
        if w >= 0 and rep.outputs[w][0] != v:
            rep.valid = False
            rep.error = "inconsistent"
            return set(), rep
    matching = _matching_from(rep.outputs)
    disjoint, maximal = is_matching(g, active_edge_set(g, inst), matching)
    rep.valid = disjoint and maximal
    rep.extra["preprocess_bits"] = pre.bits
    rep.extra["phases"] = {e: rep.outputs[e[0]][1] for e in matching}
    return matching, rep


def mm_tree(t: RootedTree, inst: RecurrentInstance) -> tuple[set, RunReport]:
    prog = ForestMatchingProgram(t.graph, [(list(t.parent), list(t.depth))])
    return _run_matching(t.graph, prog, inst)


def mm_arboricity(g: Graph, fd: ForestDecomposition, inst: RecurrentInstance) -> tuple[set, RunReport]:
    covered = {e for forest in fd.forests for e in forest}
    if covered != set(g.edges):
        raise InvalidInput("forest decomposition does not cover the edge set")
    prog = ForestMatchingProgram(g, [_root_forest(g, forest) for forest in fd.forests])
    return _run_matching(g, prog, inst)


# ------------------------------------------------------------------ MIS

class ColorMisProgram(NodeProgram):
    """Color-c vertices decide in round c: join unless an active neighbor joined."""

    name = "mis-coloring"

    def __init__(self, coloring: Sequence[int]):
        self.coloring = list(coloring)
        self.width = max(1, max(self.coloring, default=1).bit_length())
        self.payload_bits = self.width

    def preprocess(self, g: Graph, v: int) -> Bits:
        return Bits(self.coloring[v], self.width)

    def init(self, ctx: NodeContext):
        return {"color": ctx.payload.value, "active": set(ctx.local), "round": 0}, {}, None

    def on_round(self, st, inbox):
        st["round"] += 1
        if any(w in st["active"] for w in inbox):
            return st, {}, False
        if st["round"] == st["color"]:
            return st, {w: "join" for w in st["active"]}, True
        return st, {}, None


def _mis_report(g: Graph, inst: RecurrentInstance, rep: RunReport) -> set:
    members = {v for v, x in enumerate(rep.outputs) if x}
    indep, maximal = is_mis(g, active_edge_set(g, inst), members)
    rep.valid = indep and maximal
    return members


def mis_by_coloring(g: Graph, coloring: Sequence[int], inst: RecurrentInstance) -> tuple[set, RunReport]:
    if len(coloring) != g.n or not is_proper(g, coloring) or min(coloring, default=1) < 1:
        raise InvalidColoring("coloring must be proper with colors >= 1")
    prog = ColorMisProgram(coloring)
    pre = run_preprocess(g, prog)
    rep = run_instance(g, pre, prog, inst, round_cap=max(coloring, default=0) + 1)
    rep.extra["preprocess_bits"] = pre.bits
    return _mis_report(g, inst, rep), rep


class JoinAtOnceProgram(NodeProgram):
    """Inner MIS for parts without active edges: everyone joins immediately."""

    name = "mis-edgeless"
    rounds = 0

    def init(self, ctx: NodeContext):
        return None, {}, True


class CliqueMinIdProgram(NodeProgram):
    """Inner MIS for disjoint unions of cliques: the lowest participating id joins.

    Neighbors that stay silent in the first round are treated as absent.
    """

    name = "mis-clique"
    rounds = 1

    def init(self, ctx: NodeContext):
        return ctx, {w: "hello" for w in ctx.local}, None

    def on_round(self, ctx, inbox):
        return ctx, {}, all(ctx.id < w for w in inbox)


class MisSplitProgram(NodeProgram):
    """Extends an independent set part by part over a vertex cover V_1..V_k.

    Part i runs its inner program for T rounds on the vertices of V_i that
    are not yet dominated, then one round announces the new members. Inner
    programs see as local input the active neighbors inside their part and
    must treat neighbors that never send as absent.
    """

    name = "mis-split"

    def __init__(self, cover: Sequence[Sequence[int]], inner: Sequence[NodeProgram], t: int):
        self.cover = [set(p) for p in cover]
        self.inner = list(inner)
        self.t = t
        self.k = len(self.cover)

    @property
    def round_bound(self) -> int:
        return self.t * self.k + self.k - 1

    def preprocess(self, g: Graph, v: int) -> Bits:
        fields = [(int(v in part), 1) for part in self.cover]
        for i, prog in enumerate(self.inner):
            b = prog.preprocess(g, v) if v in self.cover[i] else Bits(0, 0)
            fields.append((b.width, 16))
            fields.append((b.value, b.width))
        return pack(fields)

    def _split(self, payload: Bits):
        width = payload.width
        value = payload.value
        member = []
        pos = width
        for _ in range(self.k):
            pos -= 1
            member.append(value >> pos & 1)
        inner = []
        for _ in range(self.k):
            pos -= 16
            w = value >> pos & 0xFFFF
            pos -= w
            inner.append(Bits(value >> pos & ((1 << w) - 1), w))
        return member, inner

    def init(self, ctx: NodeContext):
        member, inner = self._split(ctx.payload)
        st = {"ctx": ctx, "member": member, "inner_pl": inner, "active": set(ctx.local),
              "round": 0, "phase": 0, "istate": None, "running": False}
        return self._start_phase(st)

    def _start_phase(self, st):
        i = st["phase"]
        ctx = st["ctx"]
        if not st["member"][i]:
            return st, {}, None
        local = tuple(w for w in ctx.neighbors if w in st["active"])
        ictx = NodeContext(ctx.id, ctx.n, ctx.neighbors, st["inner_pl"][i], local, ctx._meter)
        s, out, res = self.inner[i].init(ictx)
        st["istate"], st["running"] = s, res is None
        return self._after_inner(st, out, res)

    def _after_inner(self, st, out, res):
        msgs = {w: ("inner", st["phase"], m) for w, m in (out or {}).items()}
        if res is None:
            return st, msgs, None
        st["running"] = False
        if res:
            # announce and stop; announcement rides with any final inner message
            for w in st["active"]:
                msgs[w] = ("join", st["phase"], msgs.get(w, (None, None, None))[2])
            return st, msgs, True
        return st, msgs, None if st["phase"] < self.k - 1 else False

    def on_round(self, st, inbox):
        st["round"] += 1
        ctx = st["ctx"]
        if any(tag == "join" and w in st["active"] for w, (tag, _, _) in inbox.items()):
            return st, {}, False
        phase, step = divmod(st["round"], self.t + 1)
        if step == 0:
            # a new part starts; the previous one has finished
            st["phase"] = phase
            st["running"] = False
            if phase >= self.k:
                return st, {}, False
            return self._start_phase(st)
        if not st["running"]:
            if phase == self.k - 1 and step == self.t:
                return st, {}, False
            return st, {}, None
        inner_in = {w: m for w, (tag, ph, m) in inbox.items() if ph == phase and m is not None}
        s, out, res = self.inner[phase].on_round(st["istate"], inner_in)
        st["istate"] = s
        if res is None and step == self.t:
            res = False  # inner exceeded its declared rounds; treat as not joining
            st["overrun"] = True
        return self._after_inner(st, out, res)


def mis_split(g: Graph, cover: Sequence[Sequence[int]], inner_mis, inst: RecurrentInstance,
              t: Optional[int] = None) -> tuple[set, RunReport]:
    """inner_mis is one NodeProgram or one per part; t defaults to their largest `rounds`."""
    seen = set()
    for part in cover:
        seen.update(part)
    if seen != set(range(g.n)):
        raise InvalidCover(f"{g.n - len(seen & set(range(g.n)))} vertices are not covered")
    inner = list(inner_mis) if isinstance(inner_mis, (list, tuple)) else [inner_mis] * len(cover)
    if len(inner) != len(cover):
        raise InvalidInput("need one inner program per part")
    if t is None:
        t = max(getattr(p, "rounds", 1) for p in inner)
    prog = MisSplitProgram(cover, [_PartRestricted(p, set(part)) for p, part in zip(inner, cover)], t)
    pre = run_preprocess(g, prog)
    rep = run_instance(g, pre, prog, inst, round_cap=prog.round_bound + 1)
    rep.extra["round_bound"] = prog.round_bound
    return _mis_report(g, inst, rep), rep


class _PartRestricted(NodeProgram):
    """Restricts an inner program's local input to neighbors inside its part."""

    def __init__(self, inner: NodeProgram, part: set):
        self.inner, self.part = inner, part
        self.name = inner.name

    def preprocess(self, g: Graph, v: int) -> Bits:
        inside = pack([(int(w in self.part), 1) for w in g.adj[v]])
        return _concat(inside, self.inner.preprocess(g, v))

    def init(self, ctx: NodeContext):
        d = ctx.degree
        inside = ctx.payload.value >> (ctx.payload.width - d) if d else 0
        in_part = {w for i, w in enumerate(ctx.neighbors) if inside >> (d - 1 - i) & 1}
        rest = Bits(ctx.payload.value & ((1 << (ctx.payload.width - d)) - 1), ctx.payload.width - d)
        local = tuple(w for w in ctx.local if w in in_part)
        return self.inner.init(NodeContext(ctx.id, ctx.n, ctx.neighbors, rest, local, ctx._meter))

    def on_round(self, state, inbox):
        return self.inner.on_round(state, inbox)


def _concat(a: Bits, b: Bits) -> Bits:
    return Bits((a.value << b.width) | b.value, a.width + b.width)


# ------------------------------------------------------- degree splitting

@dataclass
class DegreePartition:
    part_of: list  # part id in 1..d per vertex
    d: int
    bound: int
    moves: int

    def induced_degree(self, g: Graph) -> int:
        return max((sum(self.part_of[w] == self.part_of[v] for w in g.adj[v]) for v in range(g.n)), default=0)


def degree_split(g: Graph, d: int) -> DegreePartition:
    """Local moves until every vertex has at most ceil(Delta/d) neighbors in its own part.

    Each move lowers the number of same-part ordered neighbor pairs by at
    least 2, so there are at most |E| moves.
    """
    delta = g.max_degree
    if d < 1 or (delta and d > delta):
        raise InvalidInput(f"need 1 <= d <= max degree, got d={d}")
    bound = math.ceil(delta / d) if delta else 0
    part = [v % d + 1 for v in range(g.n)]
    moves = 0
    changed = True
    while changed:
        changed = False
        for v in range(g.n):
            counts = [0] * (d + 1)
            for w in g.adj[v]:
                counts[part[w]] += 1
            if counts[part[v]] > bound:
                best = min(range(1, d + 1), key=lambda p: (counts[p], p))
                part[v] = best
                moves += 1
                changed = True
    return DegreePartition(part, d, bound, moves)
