import pytest
from hypothesis import given
from hypothesis import strategies as st

from supported import cds_tree as T
from supported.errors import InvalidInput, InvalidK, MissingParent
from supported.graph import generate_path, generate_random_tree, generate_star, root_at
from supported.oracles import cds_tree_dp, dominates


def random_instance(n, seed, density, data):
    g = generate_random_tree(n, seed)
    t = root_at(g, data.draw(st.integers(0, n - 1)))
    clients = [v for v in range(n) if (v * 2654435761 + seed) % 1000 < density * 1000]
    return t, clients


def test_p_up_examples():
    t = root_at(generate_path(10), 0)
    assert T.p_up(t, [1, 3, 5, 7]) == {2, 6}
    assert T.p_up(root_at(generate_random_tree(40, 2), 0), []) == set()
    assert T.p_up(root_at(generate_star(5), 0), range(1, 6)) == {0}


def test_p_up_subtree_mode():
    t = root_at(generate_path(3), 0)
    assert T.p_up(t, [0], subtree_mode=True, root_parent=99) == {99}
    with pytest.raises(MissingParent):
        T.p_up(t, [0], subtree_mode=True)


@given(st.integers(1, 120), st.integers(0, 10_000), st.floats(0, 1), st.data())
def test_p_up_is_optimal_and_upmost(n, seed, density, data):
    t, clients = random_instance(n, seed, density, data)
    d = T.p_up(t, clients)
    assert dominates(t.graph, clients, d)
    assert len(d) == cds_tree_dp(t, clients)[0]
    assert T.is_upmost(t, clients, d)
    assert T.make_upmost(t, clients, d) == d


def test_make_upmost_examples():
    t = root_at(generate_path(10), 0)
    assert T.make_upmost(t, [1], {1}) == {0}
    assert T.make_upmost(t, [1, 3, 5, 7], {2, 6}) == {2, 6}
    with pytest.raises(InvalidInput):
        T.make_upmost(t, [1, 3], {0})


@given(st.integers(1, 60), st.integers(0, 10_000), st.floats(0, 1), st.data())
def test_make_upmost_keeps_size_and_domination(n, seed, density, data):
    t, clients = random_instance(n, seed, density, data)
    d = set(clients)
    up = T.make_upmost(t, clients, d)
    assert len(up) <= len(d) and dominates(t.graph, clients, up) and T.is_upmost(t, clients, up)


def test_decompose_examples():
    dec = T.decompose(root_at(generate_path(12), 0), 5)
    assert dec.roots == (0, 5, 10)
    shallow = root_at(generate_star(6), 0)
    dec = T.decompose(shallow, 5)
    assert dec.roots == (0,)
    kinds, _ = T.classify_subtrees(dec, [1, 2])
    assert kinds == {0: T.L_TREE}
    for k in (1, 3, 4, 6, 8):
        with pytest.raises(InvalidK):
            T.decompose(shallow, k)


@given(st.integers(1, 200), st.integers(0, 10_000), st.sampled_from([5, 9]), st.data())
def test_subtree_root_is_nearest_layer_multiple(n, seed, k, data):
    t, _ = random_instance(n, seed, 0, data)
    dec = T.decompose(t, k)
    for v in range(n):
        anc = next(u for u in t.path_to_root(v) if t.depth[u] % k == 0)
        assert dec.subtree_root[v] == anc
        assert t.depth[v] - t.depth[anc] < k


def test_classify_examples():
    t = root_at(generate_path(12), 0)
    dec = T.decompose(t, 5)
    kinds, _ = T.classify_subtrees(dec, [0, 2, 4, 6, 8])
    assert kinds[0] == T.FULL
    kinds, peaks = T.classify_subtrees(dec, [])
    assert kinds[0] == T.CUT and kinds[5] == T.CUT and kinds[10] == T.L_TREE
    assert 0 in peaks[0]


@given(st.integers(10, 200), st.integers(0, 10_000), st.floats(0, 1), st.data())
def test_peak_boundary_edges_join_non_clients(n, seed, density, data):
    t, clients = random_instance(n, seed, density, data)
    cset = set(clients)
    dec = T.decompose(t, 5)
    kinds, peaks = T.classify_subtrees(dec, clients)
    for r, peak in peaks.items():
        assert kinds[r] == T.CUT and r in peak
        for u in peak:
            for c in dec.inner_children(u):
                if c not in peak:
                    assert u not in cset and c not in cset


def test_appr_examples():
    t = root_at(generate_star(6), 0)
    d, rep = T.appr(t, 5, [1, 2, 3])
    assert d == T.p_up(t, [1, 2, 3])
    big = root_at(generate_random_tree(300, 9), 0)
    res = T.appr_central(big, 5, [])
    assert res.dominators == set() and res.full_count == 0


@given(st.integers(1, 300), st.integers(0, 10_000), st.floats(0, 1), st.sampled_from([5, 9]), st.data())
def test_appr_matches_mirror_and_bounds(n, seed, density, k, data):
    t, clients = random_instance(n, seed, density, data)
    d, rep = T.appr(t, k, clients)
    res = T.appr_central(t, k, clients)
    assert d == res.dominators
    assert dominates(t.graph, clients, d)
    opt, _ = cds_tree_dp(t, clients)
    assert len(d) - res.full_count <= opt
    assert len(d) <= T.ratio_bound(k) * opt
    assert rep.rounds <= 3 * k + 1
    assert rep.extra["preprocess_bits"] <= (k - 1).bit_length()


@given(st.integers(20, 300), st.integers(0, 10_000), st.floats(0.3, 1), st.data())
def test_full_subtrees_hold_many_optimal_dominators(n, seed, density, data):
    t, clients = random_instance(n, seed, density, data)
    k = 5
    dec = T.decompose(t, k)
    kinds, _ = T.classify_subtrees(dec, clients)
    opt = T.p_up(t, clients)
    for r, kind in kinds.items():
        if kind == T.FULL:
            assert len(opt & set(dec.members[r])) >= (k - 1) // 4


def test_lower_bound_instances():
    g, inst = T.gen_path_lb_instances("C1", 2)
    assert g.n == 10 and [v for v, b in enumerate(inst.payload) if b] == [1, 3, 5, 7]
    g, inst = T.gen_path_lb_instances("C2", 2)
    assert [v for v, b in enumerate(inst.payload) if b] == [3, 5, 7, 9]
    g, inst = T.gen_path_lb_instances("theorem2-S", 5)
    assert g.n == 27 and [v for v, b in enumerate(inst.payload) if b] == list(range(0, 27, 2))
    g, inst = T.gen_path_lb_instances("theorem2-S'", 5)
    assert [v for v, b in enumerate(inst.payload) if b] == list(range(2, 25, 2))
    with pytest.raises(InvalidK):
        T.gen_path_lb_instances("C1", 3)
    with pytest.raises(InvalidK):
        T.gen_path_lb_instances("theorem2-S", 6)


def test_c1_c2_unique_optima_differ():
    for kind, expect in (("C1", {2, 6}), ("C2", {4, 8})):
        g, inst = T.gen_path_lb_instances(kind, 2)
        clients = [v for v, b in enumerate(inst.payload) if b]
        t = root_at(g, 0)
        assert T.p_up(t, clients) == expect
