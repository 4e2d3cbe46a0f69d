import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from supported import color_completion as C
from supported.errors import (CapExceeded, CompletionFailed, Inconsistent, InvalidDefaultColoring, InvalidK,
                              RejectedInstance)
from supported.graph import (generate_complete, generate_path, generate_random_graph, greedy_chromatic_upper,
                             is_proper)
from supported.oracles import check_proper_extension
from supported.sim import precoloring, run_instance, run_preprocess


def random_pc(g, rng, density, palette):
    pc = {}
    for v in range(g.n):
        if rng.random() < density:
            used = {pc.get(w) for w in g.adj[v]}
            free = [c for c in range(1, palette + 1) if c not in used]
            if free:
                pc[v] = rng.choice(free)
    return pc


def instance(n, p, seed, density):
    g = generate_random_graph(n, p, seed)
    chi, dc = greedy_chromatic_upper(g)
    rng = random.Random(seed)
    pc = random_pc(g, rng, density, max(1, chi) * (g.max_degree + 1))
    return g, dc, pc


def test_codec_round_trip():
    codec = C.PaletteCodec(3, 5)
    codes = {codec.encode(i, j) for i in range(1, 4) for j in range(1, 6)}
    assert codes == set(range(1, 16))
    assert all(codec.decode(codec.encode(i, j)) == (i, j) for i in range(1, 4) for j in range(1, 6))


def test_color_stats_examples():
    s = C.color_stats({0: 1, 1: 2}, [1, 2, 2, 3])
    assert (s.chi_pc, s.chi_un, s.chi_new, s.chi_all) == (2, 2, 1, 3)
    s = C.color_stats({}, [1, 2, 3])
    assert s.chi_new == s.chi_all == 3
    with pytest.raises(Inconsistent):
        C.color_stats({0: 2}, [1, 2])


def test_single_round_examples():
    g = generate_path(3)
    col, rep = C.cc_single_round(g, [1, 2, 1], {0: 5, 1: 1, 2: 5})
    assert col == [5, 1, 5] and rep.extra["chi_new"] == 0 and rep.rounds == 1
    col, rep = C.cc_single_round(g, [1, 2, 1], {})
    codec = C.PaletteCodec(2, 3)
    assert [codec.decode(c) for c in col] == [(1, 1), (2, 1), (1, 1)]
    with pytest.raises(RejectedInstance):
        C.cc_single_round(g, [1, 2, 1], {0: 1, 1: 1})
    with pytest.raises(InvalidDefaultColoring):
        C.cc_single_round(g, [1, 1, 1], {})


@given(st.integers(1, 30), st.floats(0, 0.5), st.integers(0, 10_000), st.floats(0, 1))
def test_single_round_properties(n, p, seed, density):
    g, dc, pc = instance(n, p, seed, density)
    col, rep = C.cc_single_round(g, dc, pc)
    chi, delta = max(dc), max(1, g.max_degree)
    assert rep.rounds == 1 and check_proper_extension(g, pc, col)
    assert rep.extra["chi_new"] <= chi * delta
    codec = C.PaletteCodec(chi, delta + 1)
    for v in range(n):
        if v not in pc and any(w not in pc for w in g.adj[v]):
            assert codec.decode(col[v])[0] == dc[v]


def test_k_rounds_examples():
    g, dc, pc = instance(20, 0.3, 4, 0.4)
    assert C.cc_k_rounds(g, dc, pc, 1)[0] == C.cc_single_round(g, dc, pc)[0]
    k4 = generate_complete(4)
    col, rep = C.cc_k_rounds(k4, [1, 2, 3, 4], {}, 4)
    assert is_proper(k4, col) and len(set(col)) <= 4
    tri = generate_complete(3)
    col, rep = C.cc_k_rounds(tri, [1, 2, 3], {}, 3)
    assert rep.rounds == 3 and len(set(col)) <= 3 and is_proper(tri, col)
    with pytest.raises(InvalidK):
        C.cc_k_rounds(tri, [1, 2, 3], {}, 4)
    with pytest.raises(InvalidK):
        C.cc_k_rounds(tri, [1, 2, 3], {}, 0)


@given(st.integers(2, 30), st.floats(0.05, 0.6), st.integers(0, 10_000), st.floats(0, 1), st.data())
def test_k_rounds_properties(n, p, seed, density, data):
    g, dc, pc = instance(n, p, seed, density)
    chi, delta = max(dc), max(1, g.max_degree)
    k = data.draw(st.integers(1, chi))
    col, rep = C.cc_k_rounds(g, dc, pc, k)
    assert rep.rounds <= k and check_proper_extension(g, pc, col)
    assert rep.extra["chi_new"] <= max(math.ceil(chi / k) * delta, delta + 1)
    # a vertex decides exactly in the round of its default color class
    prog = C.KRoundsCC(dc, g.max_degree, k)
    pre = run_preprocess(g, prog)
    for cap in range(1, k):
        try:
            partial = run_instance(g, pre, prog, precoloring(pc), round_cap=cap).outputs
        except CapExceeded as exc:
            partial = exc.details["report"].outputs
        for v in range(n):
            if v not in pc:
                assert (partial[v] is not None) == ((dc[v] - 1) % k + 1 <= cap)


def test_priority_examples():
    g, dc, _ = instance(25, 0.3, 8, 0)
    col, stats, rep = C.cc_priority_recoloring(g, dc, {})
    assert set(col) <= set(range(1, max(dc) + 1)) and stats.chi_new <= max(dc)
    pc = {v: c for v, c in enumerate(dc)}
    col, stats, _ = C.cc_priority_recoloring(g, dc, pc)
    assert col == dc and stats.chi_new == 0


def test_priority_bad_bound_fixture():
    g, dc, pc = C.bad_bound_fixture()
    col, stats, rep = C.cc_priority_recoloring(g, dc, pc)
    assert check_proper_extension(g, pc, col)
    new = {col[v] for v in range(g.n) if v not in pc} - set(pc.values())
    assert new == {7, 8, 9, 10}
    assert stats.chi_new == 4 and stats.chi_pc == 10 and stats.chi_all == 14


@given(st.integers(1, 30), st.floats(0, 0.6), st.integers(0, 10_000), st.floats(0, 1))
def test_priority_properties(n, p, seed, density):
    g, dc, pc = instance(n, p, seed, density)
    col, stats, rep = C.cc_priority_recoloring(g, dc, pc)
    assert check_proper_extension(g, pc, col)
    assert stats.chi_new <= len(set(dc))
    assert stats.chi_all == stats.chi_pc + stats.chi_new <= stats.chi_pc + max(dc)
    assert rep.rounds <= len(set(dc))
    for c in set(dc):
        cls = [v for v in range(n) if dc[v] == c]
        assert not any(g.has_edge(u, v) for u in cls for v in cls)


def test_set_family_examples():
    fam = C.build_set_family(2, 1)
    a, b = fam.sets
    assert (a & ~b).bit_count() >= 2 and (b & ~a).bit_count() >= 2
    assert fam.m == C.family_size(2, 1) == 23
    fam = C.build_set_family(6, 2, seed=3)
    assert fam.exhaustive and C.family_violation(fam.sets, 2) is None
    assert fam.members(1) == [x + 1 for x in range(fam.m) if fam.sets[0] >> x & 1]


def test_set_family_large_sampled():
    fam = C.build_set_family(10_000, 8, seed=1, samples=20_000)
    assert not fam.exhaustive and fam.m == math.ceil(23 * 64 * math.log2(10_000))
    assert C.family_violation(fam.sets, 8, samples=100_000, seed=99) is None


def test_family_violation_detects_bad_family():
    assert C.family_violation([0b111, 0b111, 0b1], 1) is not None


def test_no_preprocess_examples():
    g = generate_path(5)
    fam = C.build_set_family(5, 2)
    ids = [1, 2, 3, 4, 5]
    col, rep = C.cc_no_preprocess(g, ids, {}, fam)
    assert is_proper(g, col) and rep.rounds == 1 and rep.extra["preprocess_bits"] == 0
    pc = {0: 1, 1: 2, 2: 1, 3: 2, 4: 1}
    assert C.cc_no_preprocess(g, ids, pc, fam)[0] == [1, 2, 1, 2, 1]
    with pytest.raises(ValueError):
        C.cc_no_preprocess(g, [1, 1, 2, 3, 4], {}, fam)


def test_no_preprocess_reports_out_of_palette_failure():
    g = generate_complete(3)
    fam = C.SetFamily(3, 2, 3, (0b001, 0b010, 0b100), True)
    with pytest.raises(CompletionFailed):
        C.cc_no_preprocess(g, [1, 2, 3], {1: 1}, fam)


@given(st.integers(2, 24), st.integers(0, 10_000), st.floats(0, 1))
def test_no_preprocess_properties(n, seed, density):
    g = generate_random_graph(n, 0.15, seed)
    delta = max(1, g.max_degree)
    fam = C.build_set_family(n, delta, seed=seed, samples=2000)
    rng = random.Random(seed)
    pc = random_pc(g, rng, density, fam.m)
    ids = rng.sample(range(1, n + 1), n)
    col, rep = C.cc_no_preprocess(g, ids, pc, fam)
    assert rep.rounds == 1 and check_proper_extension(g, pc, col)
