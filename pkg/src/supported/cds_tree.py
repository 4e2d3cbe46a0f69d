"""Client dominating set on trees.

Exact leaves-up greedy (P_up), the depth-k subtree decomposition, per-instance
subtree classification, and the constant-round approximation APPR in two
forms: a sequential mirror and a NodeProgram for the simulator.
"""

from dataclasses import dataclass
from typing import Optional

from .errors import InvalidInput, InvalidK, MissingParent
from .graph import Graph, RootedTree, generate_path
from .oracles import as_mask, dominates
from .sim import (Bits, NodeProgram, RecurrentInstance, RunReport, client_set,
                  run_instance, run_preprocess)

L_TREE, CUT, FULL = "L-tree", "cut I-tree", "full I-tree"


def check_k(k: int) -> None:
    if k < 5 or (k - 1) % 4:
        raise InvalidK(f"k must be 4l+1 with l >= 1, got {k}")


def _greedy_up(order_up, children, parent, root, is_client, subtree_mode, root_parent):
    """Leaves-up greedy on a (sub)tree given bottom-up order and child lists.

    Returns (dominators, parent_selected). In subtree mode an undominated
    client root is covered by its ambient parent instead of itself.
    """
    dom = set()
    chosen = set()
    for w in order_up:
        kids = children.get(w, ())
        if any(is_client[c] and c not in dom for c in kids):
            chosen.add(w)
            dom.add(w)
            dom.update(kids)
            if w != root:
                dom.add(parent[w])
    parent_selected = False
    if is_client[root] and root not in dom:
        if subtree_mode:
            if root_parent is None:
                raise MissingParent(f"subtree root {root} has no parent")
            parent_selected = True
        else:
            chosen.add(root)
    return chosen, parent_selected


def p_up(t: RootedTree, clients, subtree_mode: bool = False, root_parent: Optional[int] = None) -> set:
    """Exact minimum client dominating set, the upmost optimum.

    With subtree_mode the tree is regarded as hanging below root_parent,
    which is returned in place of an undominated client root.
    """
    is_client = as_mask(clients, t.graph.n)
    children = {v: t.children[v] for v in range(t.graph.n)}
    chosen, sel = _greedy_up(list(reversed(t.order)), children, t.parent, t.root,
                               is_client, subtree_mode, root_parent)
    if sel:
        chosen.add(root_parent)
    return chosen


def make_upmost(t: RootedTree, clients, d) -> set:
    """Push members toward the root while domination is preserved.

    A member whose parent is already a member and that is redundant is
    dropped, so the size never grows.
    """
    is_client = as_mask(clients, t.graph.n)
    cl = [v for v in range(t.graph.n) if is_client[v]]
    d = set(d)
    if not dominates(t.graph, cl, d):
        raise InvalidInput("set does not dominate the clients")
    changed = True
    while changed:
        changed = False
        for w in sorted(d, key=lambda v: (-t.depth[v], v)):
            p = t.parent[w]
            if p is None:
                continue
            trial = (d - {w}) | {p}
            if dominates(t.graph, cl, trial):
                d = trial
                changed = True
                break
    return d


def is_upmost(t: RootedTree, clients, d) -> bool:
    is_client = as_mask(clients, t.graph.n)
    cl = [v for v in range(t.graph.n) if is_client[v]]
    d = set(d)
    return all(t.parent[w] is None or not dominates(t.graph, cl, (d - {w}) | {t.parent[w]}) for w in d)


@dataclass(frozen=True)
class TreeDecompositionK:
    tree: RootedTree
    k: int
    layer: tuple
    subtree_root: tuple
    roots: tuple
    members: dict          # root -> vertices of T[root] in BFS order
    layer_leaves: dict     # root -> leaves of T[root] that are internal in T
    hanging: dict          # root -> roots of subtrees hanging below T[root]

    def inner_children(self, v: int) -> tuple:
        """Children of v inside its own subtree."""
        if self.layer[v] % self.k == self.k - 1:
            return ()
        return self.tree.children[v]


def decompose(t: RootedTree, k: int) -> TreeDecompositionK:
    check_k(k)
    n = t.graph.n
    layer = t.depth
    sroot = [0] * n
    members = {}
    for v in t.order:
        if layer[v] % k == 0:
            sroot[v] = v
            members[v] = []
        else:
            sroot[v] = sroot[t.parent[v]]
        members[sroot[v]].append(v)
    roots = tuple(v for v in t.order if layer[v] % k == 0)
    lleaves = {r: [] for r in roots}
    hanging = {r: [] for r in roots}
    for v in t.order:
        if layer[v] % k == k - 1 and t.children[v]:
            lleaves[sroot[v]].append(v)
            hanging[sroot[v]].extend(t.children[v])
    return TreeDecompositionK(t, k, layer, tuple(sroot), roots, members,
                              {r: tuple(x) for r, x in lleaves.items()},
                              {r: tuple(x) for r, x in hanging.items()})


def _classify_local(root, inner_children, hang_children, is_client):
    """Kind and peak of one subtree from its local structure.

    ok[u] holds when every downward path from u to a hanging root has two
    consecutive non-clients. The peak is the set of vertices all of whose
    ancestors (inside the subtree) and themselves are ok.
    """
    order = [root]
    i = 0
    while i < len(order):
        order.extend(inner_children.get(order[i], ()))
        i += 1
    if not any(hang_children.get(u) for u in order):
        return L_TREE, None
    ok = {}
    for u in reversed(order):
        u_out = not is_client[u]
        good = True
        for c in inner_children.get(u, ()):
            if not (ok[c] or (u_out and not is_client[c])):
                good = False
        for w in hang_children.get(u, ()):
            if not (u_out and not is_client[w]):
                good = False
        ok[u] = good
    if not ok[root]:
        return FULL, None
    # keep only vertices whose whole ancestor chain is ok (top part)
    top = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for c in inner_children.get(u, ()):
            if ok[c]:
                top.add(c)
                stack.append(c)
    return CUT, top


def classify_subtrees(dec: TreeDecompositionK, clients) -> tuple[dict, dict]:
    """Kind per subtree root, and peak vertex sets for cut I-trees."""
    t = dec.tree
    is_client = as_mask(clients, t.graph.n)
    kinds, peaks = {}, {}
    for r in dec.roots:
        inner = {u: dec.inner_children(u) for u in dec.members[r]}
        hang = {u: t.children[u] for u in dec.layer_leaves[r]}
        kind, peak = _classify_local(r, inner, hang, is_client)
        kinds[r] = kind
        if peak is not None:
            peaks[r] = peak
    return kinds, peaks


def _subtree_solve(root, parent_of_root, inner_children, hang_children, is_client, phase):
    """Solve one subtree from its local view.

    Phase 1 returns (parent(root) joins, root itself is a phase-1 dominator,
    kind); phase 2 returns the internal dominators for the residual clients.
    """
    kind, peak = _classify_local(root, inner_children, hang_children, is_client)
    order = [root]
    i = 0
    while i < len(order):
        order.extend(inner_children.get(order[i], ()))
        i += 1
    parent = {}
    for u in order:
        for c in inner_children.get(u, ()):
            parent[c] = u
    if phase == 1:
        if kind == FULL or parent_of_root is None:
            return parent_of_root is not None and kind == FULL, False, kind
        if kind == CUT:
            order = [u for u in order if u in peak]
            kids = {u: tuple(c for c in inner_children.get(u, ()) if c in peak) for u in order}
        else:
            kids = inner_children
        chosen, sel = _greedy_up(list(reversed(order)), kids, parent, root, is_client, True, parent_of_root)
        return sel, root in chosen, kind
    chosen, _ = _greedy_up(list(reversed(order)), inner_children, parent, root, is_client, False, None)
    return chosen, kind


@dataclass
class ApprResult:
    dominators: set
    lleaves: set
    internal: set
    kinds: dict
    full_count: int


def appr_central(t: RootedTree, k: int, clients, dec: Optional[TreeDecompositionK] = None,
                 notify_hanging: bool = True) -> ApprResult:
    """Sequential mirror of the distributed APPR protocol.

    With notify_hanging, a subtree root that the first phase already picks
    as a dominator marks its parent (a layer-leaf) as dominated before the
    second phase. Without it, a client layer-leaf whose hanging child is a
    dominator gets a second, redundant dominator from its own subtree.
    """
    dec = dec or decompose(t, k)
    n = t.graph.n
    is_client = as_mask(clients, n)
    local = {}
    for r in dec.roots:
        inner = {u: dec.inner_children(u) for u in dec.members[r]}
        hang = {u: t.children[u] for u in dec.layer_leaves[r]}
        local[r] = (inner, hang)
    kinds = {}
    lleaves = set()
    covered_from_below = set()
    for r in dec.roots:
        sel, root_chosen, kind = _subtree_solve(r, t.parent[r], *local[r], is_client, 1)
        kinds[r] = kind
        if sel:
            lleaves.add(t.parent[r])
        if root_chosen and notify_hanging:
            covered_from_below.add(t.parent[r])
    dominated = set(lleaves) | covered_from_below
    for x in lleaves:
        dominated.update(t.graph.adj[x])
    residual = [is_client[v] and v not in dominated for v in range(n)]
    internal = set()
    for r in dec.roots:
        chosen, _ = _subtree_solve(r, t.parent[r], *local[r], residual, 2)
        internal |= chosen
    full = sum(1 for r in dec.roots if kinds[r] == FULL)
    return ApprResult(lleaves | internal, lleaves, internal, kinds, full)


def ratio_bound(k: int) -> float:
    return 1 + 4 / (k - 1)


class ApprProgram(NodeProgram):
    """APPR as a message-passing protocol with a fixed round schedule.

    Preprocessing stores only depth mod k. Online, round 1 tells each node
    its parent and children; subtree structure is gathered at the subtree
    root by round k; parent selections travel across subtree boundaries in
    rounds k+1 and k+2 (a root that is itself a phase-1 dominator also
    tells its parent it is covered); residual client status is gathered by round 2k+2;
    decisions are broadcast down, finishing by round 3k+1.
    """

    name = "appr"

    def __init__(self, t: RootedTree, k: int):
        check_k(k)
        self.tree = t
        self.k = k
        self.payload_bits = (k - 1).bit_length()

    def preprocess(self, g: Graph, v: int) -> Bits:
        if g is not self.tree.graph and g != self.tree.graph:
            raise InvalidInput("program was built for a different tree")
        return Bits(self.tree.depth[v] % self.k, self.payload_bits)

    def init(self, ctx):
        st = {
            "ctx": ctx, "round": 0, "lay": ctx.payload.value, "client": bool(ctx.local),
            "reports": {}, "sent_a": False, "in_lleaves": False, "dom_reports": {},
            "sent_b": False, "dominated": False,
        }
        out = {w: (st["lay"], st["client"]) for w in ctx.neighbors}
        return st, out, None

    def on_round(self, st, inbox):
        k = self.k
        st["round"] += 1
        r = st["round"]
        ctx = st["ctx"]
        out = {}
        if r == 1:
            lay = st["lay"]
            st["parent"] = None
            kids, info = [], {}
            for w, (lw, cw) in inbox.items():
                info[w] = cw
                if lw == (lay - 1) % k and lay != 0 or (lay == 0 and lw == k - 1):
                    st["parent"] = w
                else:
                    kids.append(w)
            st["kids_client"] = {w: info[w] for w in kids}
            st["is_root"] = lay == 0
            st["layer_leaf"] = lay == k - 1 and bool(kids)
            st["inner"] = [] if lay == k - 1 else sorted(kids)
            st["hang"] = sorted(kids) if st["layer_leaf"] else []
        # phase A: gather subtree structure at the root
        if 1 <= r <= k and not st["sent_a"]:
            for w, msg in inbox.items():
                if isinstance(msg, tuple) and msg and msg[0] == "A":
                    st["reports"][w] = msg[1]
            if all(c in st["reports"] for c in st["inner"]):
                desc = {ctx.id: (st["client"], tuple(st["inner"]),
                                 tuple((h, st["kids_client"][h]) for h in st["hang"]))}
                for c in st["inner"]:
                    desc.update(st["reports"][c])
                st["desc"] = desc
                st["sent_a"] = True
                if not st["is_root"]:
                    out[st["parent"]] = ("A", desc)
        if r == k and st["is_root"]:
            inner, hang, is_client = self._local_view(st["desc"])
            sel, root_chosen, _ = _subtree_solve(ctx.id, st["parent"], inner, hang, is_client, 1)
            if sel or root_chosen:
                out[st["parent"]] = ("SEL", sel, root_chosen)
        if r == k + 1:
            picks = [m for m in inbox.values() if isinstance(m, tuple) and m and m[0] == "SEL"]
            if any(m[2] for m in picks):
                st["dominated"] = True
            if any(m[1] for m in picks):
                st["in_lleaves"] = True
                st["dominated"] = True
                for w in ctx.neighbors:
                    out[w] = ("DOM",)
        if r == k + 2:
            if any(m == ("DOM",) for m in inbox.values()):
                st["dominated"] = True
        # phase B: gather dominated flags at the root
        if k + 2 <= r <= 2 * k + 2 and not st["sent_b"]:
            for w, msg in inbox.items():
                if isinstance(msg, tuple) and msg and msg[0] == "B":
                    st["dom_reports"][w] = msg[1]
            if all(c in st["dom_reports"] for c in st["inner"]):
                dom = {ctx.id} if st["dominated"] else set()
                for c in st["inner"]:
                    dom |= st["dom_reports"][c]
                st["dom_set"] = frozenset(dom)
                st["sent_b"] = True
                if not st["is_root"]:
                    out[st["parent"]] = ("B", st["dom_set"])
        if r == 2 * k + 2 and st["is_root"]:
            inner, hang, is_client = self._local_view(st["desc"])
            residual = {u: is_client[u] and u not in st["dom_set"] for u in is_client}
            chosen, _ = _subtree_solve(ctx.id, st["parent"], inner, hang, residual, 2)
            chosen = frozenset(chosen)
            for c in st["inner"]:
                out[c] = ("D", chosen)
            ctx.count(len(st["desc"]))
            return st, out, st["in_lleaves"] or ctx.id in chosen
        if r > 2 * k + 2:
            for msg in inbox.values():
                if isinstance(msg, tuple) and msg and msg[0] == "D":
                    for c in st["inner"]:
                        out[c] = msg
                    return st, out, st["in_lleaves"] or ctx.id in msg[1]
        return st, out, None

    @staticmethod
    def _local_view(desc):
        inner, hang, is_client = {}, {}, {}
        for u, (cl, kids, hs) in desc.items():
            is_client[u] = cl
            inner[u] = kids
            if hs:
                hang[u] = tuple(h for h, _ in hs)
                for h, ch in hs:
                    is_client[h] = ch
        return inner, hang, is_client


def appr(t: RootedTree, k: int, clients, round_cap: int = 100_000) -> tuple[set, RunReport]:
    """Run APPR in the simulator; returns the dominating set and the report."""
    prog = ApprProgram(t, k)
    pre = run_preprocess(t.graph, prog)
    inst = client_set(t.graph.n, [v for v, b in enumerate(as_mask(clients, t.graph.n)) if b])
    rep = run_instance(t.graph, pre, prog, inst, round_cap)
    d = {v for v, o in enumerate(rep.outputs) if o}
    rep.extra["preprocess_bits"] = pre.bits
    return d, rep


def gen_path_lb_instances(kind: str, k: int) -> tuple[Graph, RecurrentInstance]:
    """Adversarial path instances; vertex v_i (1-indexed) has id i-1."""
    if kind in ("C1", "C2"):
        if k < 2 or k % 2:
            raise InvalidK(f"{kind} needs an even k >= 2")
        n = 4 * k + 2
        lo = 2 if kind == "C1" else 4
        hi = 4 * k if kind == "C1" else 4 * k + 2
        idx = range(lo, hi + 1, 2)
    elif kind in ("theorem2-S", "theorem2-S'", "theorem2-S′"):
        check_k(k)
        n = 4 * k + 7
        idx = list(range(1, n + 1, 2))
        if kind != "theorem2-S":
            idx = [i for i in idx if i not in (1, n)]
    else:
        raise InvalidInput(f"unknown lower-bound instance kind {kind!r}")
    g = generate_path(n)
    return g, client_set(n, [i - 1 for i in idx])
