"""Color completion: extend a proper precoloring to a proper coloring.

Four online schemes run in the simulator: one round with a (dc, j) palette,
k rounds with grouped default colors, the greedy priority scheme, and a
one-round scheme without preprocessing that relies on a set family.
"""

import itertools
import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (CompletionFailed, Inconsistent, InvalidDefaultColoring, InvalidK,
                     NotFound, RejectedInstance)
from .graph import Graph, is_proper
from .sim import Bits, NodeProgram, RunReport, precoloring, run_instance, run_preprocess


@dataclass(frozen=True)
class PaletteCodec:
    """Pairs (i, j), 1 <= i <= chi, 1 <= j <= width, as positive integers.

    The schemes use width Delta+1 so the overflow color (1, Delta+1) has a
    code and every scheme shares one encoding.
    """

    chi: int
    width: int

    def encode(self, i: int, j: int) -> int:
        if not (1 <= i and 1 <= j <= self.width):
            raise ValueError(f"({i},{j}) outside the palette")
        return (i - 1) * self.width + j

    def decode(self, c: int) -> tuple[int, int]:
        return (c - 1) // self.width + 1, (c - 1) % self.width + 1


@dataclass(frozen=True)
class ColorStats:
    chi_pc: int
    chi_un: int
    chi_new: int
    chi_all: int

    def to_json(self) -> dict:
        return {"chi_pc": self.chi_pc, "chi_un": self.chi_un,
                "chi_new": self.chi_new, "chi_all": self.chi_all}


def color_stats(pc: dict, final) -> ColorStats:
    pc = {v: c for v, c in pc.items() if c}
    for v, c in pc.items():
        if final[v] != c:
            raise Inconsistent(f"vertex {v} precolored {c} but final color {final[v]}")
    p_pc = set(pc.values())
    p_un = {final[v] for v in range(len(final)) if v not in pc}
    p_new = p_un - p_pc
    return ColorStats(len(p_pc), len(p_un), len(p_new), len(p_pc | p_new))


def check_precoloring(g: Graph, pc: dict) -> None:
    for u, v in g.edges:
        cu, cv = pc.get(u, 0), pc.get(v, 0)
        if cu and cu == cv:
            raise RejectedInstance(f"precoloring not proper on edge ({u},{v})")


def check_default(g: Graph, dc) -> int:
    if len(dc) != g.n or any(c < 1 for c in dc) or not is_proper(g, dc):
        raise InvalidDefaultColoring("default coloring must be a proper coloring with positive colors")
    return max(dc, default=0)


class _DefaultColorProgram(NodeProgram):
    """Stores dc(v) at preprocessing time; subclasses define the online rule."""

    def __init__(self, dc, delta: int):
        self.dc = list(dc)
        self.chi = max(self.dc, default=1)
        self.delta = max(delta, 1)
        self.payload_bits = max(1, self.chi.bit_length())

    def preprocess(self, g, v):
        return Bits(self.dc[v], self.payload_bits)

    def init(self, ctx):
        c = ctx.local
        st = {"ctx": ctx, "dc": ctx.payload.value, "color": c, "round": 0, "heard": {}}
        out = {w: c for w in ctx.neighbors} if c else {}
        return st, out, None


class SingleRoundCC(_DefaultColorProgram):
    """Everyone decides in round 1 from the precolors it heard."""

    name = "cc-single-round"

    def on_round(self, st, inbox):
        if st["color"]:
            return st, {}, st["color"]
        ctx = st["ctx"]
        codec = PaletteCodec(self.chi, self.delta + 1)
        blocked = set(inbox.values())
        ctx.count(len(blocked) + 1)
        if len(inbox) == ctx.degree:
            choices = (codec.encode(i, j) for i in range(1, self.chi + 1) for j in range(1, self.delta + 1))
        else:
            choices = (codec.encode(st["dc"], j) for j in range(1, self.delta + 1))
        st["color"] = next(c for c in choices if c not in blocked)
        return st, {}, st["color"]


class KRoundsCC(_DefaultColorProgram):
    """Default colors congruent to i mod k decide in round i.

    A node whose neighbors are all fixed already (precolored or decided in an
    earlier round) uses the Delta+1 colors (1, 1..Delta) plus (1, Delta+1)
    when k = chi, else (2, 1).
    """

    name = "cc-k-rounds"

    def __init__(self, dc, delta: int, k: int):
        super().__init__(dc, delta)
        if not 1 <= k <= self.chi:
            raise InvalidK(f"k={k} outside 1..{self.chi}")
        self.k = k

    def on_round(self, st, inbox):
        st["round"] += 1
        st["heard"].update(inbox)
        if st["color"]:
            return st, {}, st["color"]
        ctx = st["ctx"]
        r = st["round"]
        slot = (st["dc"] - 1) % self.k + 1
        if r < slot:
            return st, {}, None
        codec = PaletteCodec(self.chi, self.delta + 1)
        blocked = set(st["heard"].values())
        if len(st["heard"]) == ctx.degree:
            extra = codec.encode(1, self.delta + 1) if self.k == self.chi else codec.encode(2, 1)
            choices = [codec.encode(1, j) for j in range(1, self.delta + 1)] + [extra]
        else:
            group = -(-st["dc"] // self.k)
            choices = [codec.encode(group, j) for j in range(1, self.delta + 1)]
        ctx.count(len(choices))
        st["color"] = next(c for c in choices if c not in blocked)
        out = {w: st["color"] for w in ctx.neighbors if w not in st["heard"]}
        return st, out if r < self.k else {}, st["color"]


class PriorityCC(_DefaultColorProgram):
    """Default color class r picks the smallest color unused around it in round r."""

    name = "cc-priority"

    def __init__(self, dc, delta: int):
        super().__init__(dc, delta)
        levels = sorted(set(self.dc))
        self.rank = {c: i + 1 for i, c in enumerate(levels)}

    def on_round(self, st, inbox):
        st["round"] += 1
        st["heard"].update(inbox)
        if st["color"]:
            return st, {}, st["color"]
        if st["round"] < self.rank[st["dc"]]:
            return st, {}, None
        ctx = st["ctx"]
        used = set(st["heard"].values())
        c = 1
        while c in used:
            c += 1
        ctx.count(c)
        st["color"] = c
        return st, {w: c for w in ctx.neighbors if w not in st["heard"]}, c


def _run(g: Graph, prog: NodeProgram, pc: dict, round_cap: int) -> tuple[list, RunReport]:
    check_precoloring(g, pc)
    pre = run_preprocess(g, prog)
    rep = run_instance(g, pre, prog, precoloring(pc), round_cap)
    coloring = list(rep.outputs)
    rep.valid = is_proper(g, coloring) and all(coloring[v] == c for v, c in pc.items() if c)
    stats = color_stats(pc, coloring)
    rep.extra.update(stats.to_json())
    rep.extra["preprocess_bits"] = pre.bits
    return coloring, rep


def cc_single_round(g: Graph, dc, pc: dict, round_cap: int = 10) -> tuple[list, RunReport]:
    check_default(g, dc)
    return _run(g, SingleRoundCC(dc, g.max_degree), pc, round_cap)


def cc_k_rounds(g: Graph, dc, pc: dict, k: int, round_cap: int = 10_000) -> tuple[list, RunReport]:
    check_default(g, dc)
    return _run(g, KRoundsCC(dc, g.max_degree, k), pc, round_cap)


def cc_priority_recoloring(g: Graph, dc, pc: dict, round_cap: int = 10_000) -> tuple[list, ColorStats, RunReport]:
    check_default(g, dc)
    coloring, rep = _run(g, PriorityCC(dc, g.max_degree), pc, round_cap)
    return coloring, color_stats(pc, coloring), rep


# ------------------------------------------------------------ set families

@dataclass(frozen=True)
class SetFamily:
    n: int
    delta: int
    m: int
    sets: tuple  # sets[i] is a bitmask over 1..m (bit x-1 for element x)
    exhaustive: bool

    def members(self, i: int) -> list:
        """Elements of F_i, with ids i in 1..n."""
        mask = self.sets[i - 1]
        return [x + 1 for x in range(self.m) if mask >> x & 1]


def family_size(n: int, delta: int) -> int:
    return math.ceil(23 * delta * delta * math.log2(n))


def family_violation(sets, delta: int, samples: Optional[int] = None, seed: int = 0) -> Optional[tuple]:
    """A tuple (i0, others) with |F_i0 minus union(others)| <= delta, or None.

    Exhaustive over all i0 and all min(delta, n-1)-subsets of the other
    indices unless `samples` is given. Indices are 1-based.
    """
    n = len(sets)
    t = min(delta, n - 1)
    if samples is None:
        for i0 in range(n):
            others = [i for i in range(n) if i != i0]
            for combo in itertools.combinations(others, t):
                union = 0
                for i in combo:
                    union |= sets[i]
                if (sets[i0] & ~union).bit_count() <= delta:
                    return i0 + 1, tuple(i + 1 for i in combo)
        return None
    rng = random.Random(seed)
    for _ in range(samples):
        pick = rng.sample(range(n), t + 1)
        union = 0
        for i in pick[1:]:
            union |= sets[i]
        if (sets[pick[0]] & ~union).bit_count() <= delta:
            return pick[0] + 1, tuple(i + 1 for i in pick[1:])
    return None


def build_set_family(n: int, delta: int, seed: int = 0, retries: int = 20,
                     samples: int = 100_000, exhaustive_limit: int = 12) -> SetFamily:
    """Random sets over [m], each element kept with probability min(1/delta, 1/2)."""
    if n < 2 or delta < 1:
        raise ValueError("need n >= 2 and delta >= 1")
    m = family_size(n, delta)
    p = min(1 / delta, 0.5)
    rng = np.random.default_rng(seed)
    exhaustive = n <= exhaustive_limit
    bad = None
    for attempt in range(retries):
        sets = []
        for _ in range(n):
            bits = np.packbits(rng.random(m) < p, bitorder="little")
            sets.append(int.from_bytes(bits.tobytes(), "little"))
        bad = family_violation(sets, delta, None if exhaustive else samples, seed + attempt)
        if bad is None:
            return SetFamily(n, delta, m, tuple(sets), exhaustive)
    raise NotFound(f"no family passed verification after {retries} tries; last violation {bad}")


class NoPreprocessCC(NodeProgram):
    """One round: F_id(v) minus neighbors' sets minus the precolors heard."""

    name = "cc-no-preprocess"
    payload_bits = 0

    def __init__(self, ids, fam: SetFamily):
        self.ids = list(ids)
        self.fam = fam

    def init(self, ctx):
        c = ctx.local
        my_id = self.ids[ctx.id]
        st = {"ctx": ctx, "color": c, "id": my_id}
        return st, {w: (my_id, c) for w in ctx.neighbors}, None

    def on_round(self, st, inbox):
        if st["color"]:
            return st, {}, st["color"]
        free = self.fam.sets[st["id"] - 1]
        for nid, c in inbox.values():
            free &= ~self.fam.sets[nid - 1]
            if c and 1 <= c <= self.fam.m:
                free &= ~(1 << (c - 1))
        if not free:
            raise CompletionFailed(f"vertex {st['ctx'].id} has no free color")
        st["color"] = (free & -free).bit_length()
        st["ctx"].count(len(inbox) + 1)
        return st, {}, st["color"]


def cc_no_preprocess(g: Graph, ids, pc: dict, fam: SetFamily, round_cap: int = 10) -> tuple[list, RunReport]:
    if len(set(ids)) != g.n or not all(1 <= i <= fam.n for i in ids):
        raise ValueError("ids must be distinct and within 1..n of the family")
    return _run(g, NoPreprocessCC(ids, fam), pc, round_cap)


def bad_bound_fixture() -> tuple[Graph, list, dict]:
    """A K4 whose vertices each see six pendants precolored 1..6.

    Four more vertices hold the precolors 11..14 away from the clique, so an
    optimal completion reuses them (no new color) while greedy-by-default-
    class picks 7, 8, 9, 10.
    """
    edges = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    pc, dc = {}, [1, 2, 3, 4]
    nxt = 4
    for a in range(4):
        for c in range(1, 7):
            edges.append((a, nxt))
            pc[nxt] = c
            dc.append(1 if a != 0 else 2)
            nxt += 1
    for c in range(11, 15):
        edges.append((4, nxt))  # 4 is a pendant of the first clique vertex
        pc[nxt] = c
        dc.append(1)
        nxt += 1
    return Graph(nxt, edges), dc, pc
