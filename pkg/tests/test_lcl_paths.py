import itertools
import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from supported import lcl_paths as L
from supported.errors import Inconsistent, InvalidInput, InvalidN0
from supported.graph import generate_path
from supported.oracles import lcl_count, lcl_exhaustive
from supported.sim import RecurrentInstance

SMALL = ["mis", "2-coloring", "acyclic"]


def walk_lengths(dg, sources, target, max_len, forward=True):
    """Lengths of all walks (edge count <= max_len) between sources and target, by brute force."""
    pred = dg.pred()
    step = (lambda u: dg.succ[u]) if forward else (lambda u: pred[u])
    found = set()
    frontier = set(sources)
    for length in range(max_len + 1):
        if target in frontier:
            found.add(length)
        frontier = {w for u in frontier for w in step(u)}
    return found


@st.composite
def random_specs(draw):
    size = draw(st.integers(2, 3))
    sigma = tuple("abc"[:size])
    singles = draw(st.sets(st.sampled_from(sigma)))
    pairs = draw(st.sets(st.tuples(st.sampled_from(sigma), st.sampled_from(sigma)), min_size=1))
    triples = draw(st.sets(st.tuples(*[st.sampled_from(sigma)] * 3), min_size=1))
    return L.LclSpec(sigma, frozenset(singles), frozenset(pairs), frozenset(triples), name="random")


# ---------------------------------------------------------------- specs

def test_spec_rejects_unknown_labels():
    with pytest.raises(InvalidInput):
        L.LclSpec(("a",), pairs=frozenset({("a", "z")}))
    with pytest.raises(InvalidInput):
        L.LclSpec(())


@pytest.mark.parametrize("name", sorted(L.BUNDLED))
def test_spec_json_round_trip(name, tmp_path):
    spec = L.BUNDLED[name]()
    L.save_spec(spec, tmp_path / "s.json")
    assert L.load_spec(tmp_path / "s.json") == spec


def test_bundled_fixture_files_match():
    from supported.cli import PACKAGE_FIXTURES
    for name, make in L.BUNDLED.items():
        assert L.load_spec(PACKAGE_FIXTURES / f"lcl-{name}.json") == make()


# ------------------------------------------------------------ normalizing

def test_normalize_identity_for_radius_one():
    spec = L.mis_spec()
    assert L.normalize_radius(spec) is spec


def test_normalize_ruling_alphabet():
    spec = L.ruling_spec()
    norm = L.normalize_radius(spec)
    assert norm.r == 1
    interior = [w for w in norm.sigma_out if None not in w]
    assert len(interior) <= len(spec.sigma_out) ** 3
    assert len(norm.sigma_out) <= (len(spec.sigma_out) + 1) ** 3


@pytest.mark.parametrize("n", range(1, 9))
def test_normalized_validity_matches_original(n):
    spec = L.ruling_spec()
    norm = L.normalize_radius(spec)
    for lab in itertools.product(spec.sigma_out, repeat=n):
        windows = L.encode_labels(lab, spec.r)
        known = set(windows) <= set(norm.sigma_out)
        if known:
            assert L.decode_labels(norm, windows) == list(lab)
        assert L.rule_check(spec, lab) == (known and L.validate(norm, windows))


# ------------------------------------------------------------- digraphs

def test_mis_digraph_edges():
    dg = L.build_digraph(L.mis_spec())
    succ = dg.succ
    assert ("I", "O") in succ[("O", "I")]
    assert ("O", "O") in succ[("I", "O")]
    assert ("O", "I") in succ[("O", "O")]
    assert ("O", "O") not in succ[("O", "O")]
    assert dg.alpha == 4


def test_two_coloring_digraph_is_two_cycle():
    dg = L.build_digraph(L.two_coloring_spec())
    edges = {(u, w) for u, ws in dg.succ.items() for w in ws}
    assert edges == {(("a", "b"), ("b", "a")), (("b", "a"), ("a", "b"))}


def test_empty_rules_digraph():
    dg = L.build_digraph(L.LclSpec(("a", "b")))
    assert not any(dg.succ.values()) and dg.S == dg.T == frozenset()
    assert L.walkspans(dg) == []


def test_build_digraph_needs_radius_one():
    with pytest.raises(InvalidInput):
        L.build_digraph(L.ruling_spec())


# ------------------------------------------------------------- checking

def test_validate_examples():
    spec = L.two_coloring_spec()
    assert L.validate(spec, "abab")
    assert not L.validate(spec, "aaaa")
    assert not L.validate(spec, ["a", L.INFEASIBLE])


@pytest.mark.parametrize("name", SMALL)
def test_rule_and_walk_checks_agree(name):
    spec = L.BUNDLED[name]()
    for n in range(1, 9):
        truth = set(lcl_exhaustive(spec, n))
        for lab in itertools.product(spec.sigma_out, repeat=n):
            assert L.validate(spec, lab) == (lab in truth)


def test_validate_flags_disagreement(monkeypatch):
    monkeypatch.setattr(L, "walk_check", lambda spec, labels: False)
    with pytest.raises(Inconsistent):
        L.validate(L.two_coloring_spec(), "ab")


@given(random_specs(), st.integers(1, 7), st.randoms(use_true_random=False))
def test_random_spec_checks_agree(spec, n, rnd):
    for _ in range(20):
        lab = [rnd.choice(spec.sigma_out) for _ in range(n)]
        assert L.rule_check(spec, lab) == L.walk_check(spec, lab)


@given(random_specs())
def test_feasible_lengths_match_counting(spec):
    feas = L.feasible_lengths(spec, 9)
    for n in range(1, 10):
        assert feas[n] == (lcl_count(spec, n) > 0)


def test_acyclic_only_short_lengths():
    feas = L.feasible_lengths(L.acyclic_spec(), 12)
    assert [n for n in range(1, 13) if feas[n]] == [3]
    assert L.infeasible_at_length(L.acyclic_spec(), 5)


# ------------------------------------------------------------ walkspans

def _find(tables, k, v):
    return next(t for t in tables if t.cycle_len == k and t.vertex == v)


def test_two_coloring_residues():
    dg = L.build_digraph(L.two_coloring_spec())
    wt = _find(L.walkspans(dg), 2, ("a", "b"))
    assert wt.left_residues == {0, 1} and wt.satisfied
    assert {x % 2 for x in walk_lengths(dg, dg.S, ("a", "b"), 8)} == {0, 1}


def test_mis_residues_against_enumeration():
    dg = L.build_digraph(L.mis_spec())
    wt = _find(L.walkspans(dg), 2, ("I", "O"))
    assert wt.left_residues == wt.right_residues == {0, 1}
    assert {x % 2 for x in walk_lengths(dg, dg.S, ("I", "O"), 8)} == {0, 1}
    assert {x % 2 for x in walk_lengths(dg, dg.T, ("I", "O"), 8, forward=False)} == {0, 1}


@given(random_specs())
def test_witness_walks_replay(spec):
    dg = L.build_digraph(spec)
    for wt in L.walkspans(dg):
        k, v = wt.cycle_len, wt.vertex
        assert wt.cycle[0] == wt.cycle[-1] == v and len(wt.cycle) == k + 1
        for walk in [wt.cycle, *wt.left.values(), *wt.right.values()]:
            assert all(b in dg.succ[a] for a, b in zip(walk, walk[1:]))
        for i, walk in wt.left.items():
            assert walk[0] in dg.S and walk[-1] == v and (len(walk) - 1) % k == i
        for i, walk in wt.right.items():
            assert walk[0] == v and walk[-1] in dg.T and (len(walk) - 1) % k == i
        exact = walk_lengths(dg, dg.S, v, 2 * dg.alpha ** 2)
        assert {x % k for x in exact} == set(wt.left)
        for i, walk in wt.left.items():
            assert len(walk) - 1 == min(x for x in exact if x % k == i)


# --------------------------------------------------------- classification

def test_classify_examples():
    assert L.classify(L.mis_spec()).verdict == "Theta1"
    assert L.classify(L.two_coloring_spec()).verdict == "Theta1"
    assert L.classify(L.acyclic_spec()).verdict == "ThetaN"
    assert L.classify(L.ruling_spec()).verdict == "Theta1"
    cls = L.classify(L.mis_spec())
    assert cls.to_json()["cycle_len"] == cls.witness.cycle_len


@given(random_specs(), st.integers(0, 40))
def test_classify_monotone_in_cap(spec, cap):
    if L.classify(spec, cap).verdict == "Theta1":
        assert L.classify(spec, cap + 1).verdict == "Theta1"
        assert L.classify(spec).verdict == "Theta1"


def test_coprime_flip_point():
    spec = L.coprime_cycles_spec(5, 7)
    full = L.classify(spec)
    assert full.verdict == "Theta1"
    w = full.to_json()
    assert (w["cycle_len"], w["max_left"], w["max_right"]) == (5, 32, 29)
    assert L.classify(spec, 31).verdict == "ThetaN"
    assert L.classify(spec, 32).verdict == "Theta1"


# ---------------------------------------------------------------- solvers

def test_solver_needs_theta1():
    with pytest.raises(InvalidInput):
        L.synthesize_solver(L.acyclic_spec())
    with pytest.raises(InvalidInput):
        L.synthesize_solver(L.ruling_spec())


def test_solver_two_bits_and_full_path():
    prog = L.synthesize_solver(L.mis_spec())
    g = generate_path(200)
    rep = L.run_solver(prog, g, L.full_path_instance(g))
    assert rep.valid and rep.extra["preprocess_bits"] == 2
    assert rep.outputs == prog.solve_central(g, L.full_path_instance(g))


def test_solver_single_vertex_runs():
    spec = L.mis_spec()
    prog = L.synthesize_solver(spec, threshold="tight")
    g = generate_path(30)
    inst = RecurrentInstance("edge-subset", tuple([False] * g.m))
    rep = L.run_solver(prog, g, inst)
    assert rep.valid and all(x in spec.singletons for x in rep.outputs)


def test_two_coloring_all_subpaths_of_p60():
    spec = L.two_coloring_spec()
    prog = L.synthesize_solver(spec)
    g = generate_path(60)
    for i in range(60):
        for j in range(i, 60):
            run = list(range(i, j + 1))
            inst = L.run_subpath_instance(g, [run])
            out = prog.solve_central(g, inst)
            assert L.validate(spec, [out[v] for v in run])


@given(st.integers(1, 80), st.integers(0, 10_000), st.sampled_from(["mis", "2-coloring", "coprime"]))
def test_distributed_matches_mirror_on_random_subsets(n, seed, name):
    spec = L.BUNDLED[name]()
    prog = L.synthesize_solver(spec, threshold="tight")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    from supported.graph import Graph
    g = Graph(n, list(zip(order, order[1:])))
    inst = RecurrentInstance("edge-subset", tuple(rng.random() < 0.85 for _ in range(g.m)))
    rep = L.run_solver(prog, g, inst)
    assert rep.outputs == prog.solve_central(g, inst)
    feas = L.feasible_lengths(spec, n)
    for run in L.subpaths(g, inst):
        assert L.validate(spec, [rep.outputs[v] for v in run]) == feas[len(run)]


@given(random_specs(), st.integers(0, 10_000))
def test_random_theta1_specs_solve(spec, seed):
    cls = L.classify(spec)
    assume(cls.verdict == "Theta1")
    prog = L.synthesize_solver(spec, cls, threshold="tight")
    rng = random.Random(seed)
    n = 120
    feas = L.feasible_lengths(spec, n)
    for _ in range(30):
        bits = tuple(rng.randint(0, 1) for _ in range(n))
        m = rng.randint(1, n)
        start = rng.randint(0, n - m)
        # psi bits of a run follow block parity of the global position
        k = prog.k
        bits = tuple(((start + i) // k) % 2 for i in range(m))
        labels = prog.run_labels(bits)
        assert L.validate(spec, labels) == feas[m]


# ----------------------------------------------------------------- speedup

def test_speedup_examples():
    spec = L.mis_spec()
    inner = L.synthesize_solver(spec, threshold="tight")
    g = generate_path(500)
    outs = []
    for n0 in (inner.radius * 8, 33):
        prog = L.speedup_transform(inner, lambda n: inner.radius, n0)
        rep = L.run_solver(prog, g, L.full_path_instance(g))
        assert rep.valid and rep.rounds <= inner.radius
        outs.append(rep.outputs)
    big = L.speedup_transform(inner, lambda n: inner.radius, 1000)
    rep = L.run_solver(big, g, L.full_path_instance(g))
    assert rep.valid and rep.outputs == inner.solve_central(g, L.full_path_instance(g))
    with pytest.raises(InvalidN0):
        L.speedup_transform(inner, lambda n: inner.radius, 4 * inner.radius)
